#include "dagnet/net.hpp"

#include <cassert>
#include <cmath>

#include "dagnet/errors.hpp"

namespace dagnet {

Activation Activation::leaky(double g) {
    if (g < 0.0 || g > 1.0) throw InvalidArgument("leaky slope must lie in [0,1]");
    return {g};
}

std::string to_string(LossKind k) {
    return k == LossKind::mse ? "mse" : "logistic";
}

LossKind loss_kind_from_string(const std::string& s) {
    if (s == "mse") return LossKind::mse;
    if (s == "logistic") return LossKind::logistic;
    throw ParseError("unknown loss '" + s + "'");
}

void validate_dataset(const Dag& dag, const Dataset& data) {
    if (data.inputs.rows() < 1) throw InvalidArgument("dataset needs at least one sample");
    if (data.inputs.rows() != data.targets.rows())
        throw InvalidArgument("input/target row counts differ");
    if (data.inputs.cols() != dag.inputs().size())
        throw InvalidArgument("input column count does not match the graph");
    if (data.targets.cols() != dag.outputs().size())
        throw InvalidArgument("target column count does not match the graph");
}

ForwardResult forward(const Dag& dag, const Activation& act, const Parameters& theta,
                      std::span<const double> x) {
    assert(theta.size() == static_cast<std::size_t>(dag.num_edges()));
    assert(x.size() == dag.inputs().size());

    ForwardResult r;
    r.activations.assign(dag.num_nodes(), 0.0);
    r.preact_hidden.assign(dag.hidden().size(), 0.0);

    for (std::size_t i = 0; i < dag.inputs().size(); ++i) r.activations[dag.inputs()[i]] = x[i];

    for (NodeId v : dag.topological_order()) {
        if (dag.role(v) == Role::input) continue;
        double z = 0.0;
        for (EdgeId e : dag.in_edges(v)) z += theta[e] * r.activations[dag.edge(e).src];
        if (dag.role(v) == Role::hidden) {
            r.preact_hidden[dag.hidden_row(v)] = z;
            r.activations[v] = act.value(z);
        } else {
            r.activations[v] = z;  // linear accumulator
        }
    }

    r.outputs.reserve(dag.outputs().size());
    for (NodeId o : dag.outputs()) r.outputs.push_back(r.activations[o]);
    return r;
}

namespace {

// Stable log(1 + exp(-|z|)) based cross-entropy with {0,1} targets.
double bce_with_logit(double z, double y) {
    return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

void check_logistic_targets(const Dataset& data) {
    for (double y : data.targets.data())
        if (y != 0.0 && y != 1.0)
            throw InvalidTarget("logistic targets must be exactly 0 or 1");
}

}  // namespace

double loss(const Dag& dag, const Activation& act, const Parameters& theta, const Dataset& data,
            LossKind kind) {
    validate_dataset(dag, data);
    if (kind == LossKind::logistic) check_logistic_targets(data);

    const int n = data.size();
    const std::size_t dout = dag.outputs().size();
    double total = 0.0;
    std::vector<double> x(dag.inputs().size());
    for (int i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = data.inputs(i, j);
        const ForwardResult f = forward(dag, act, theta, x);
        for (std::size_t o = 0; o < dout; ++o) {
            if (kind == LossKind::mse) {
                const double d = f.outputs[o] - data.targets(i, o);
                total += 0.5 * d * d;
            } else {
                total += bce_with_logit(f.outputs[o], data.targets(i, o));
            }
        }
    }
    return total / n;
}

LossAndGradient loss_and_gradient(const Dag& dag, const Activation& act, const Parameters& theta,
                                  const Dataset& data, LossKind kind) {
    validate_dataset(dag, data);
    if (kind == LossKind::logistic) check_logistic_targets(data);

    const int n = data.size();
    LossAndGradient out{0.0, Parameters(dag.num_edges(), 0.0)};

    const auto& topo = dag.topological_order();
    std::vector<double> x(dag.inputs().size());
    std::vector<double> adj(dag.num_nodes());  // dL/d(node value): dz for hidden, dy for outputs

    for (int i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = data.inputs(i, j);
        const ForwardResult f = forward(dag, act, theta, x);

        std::fill(adj.begin(), adj.end(), 0.0);
        for (std::size_t o = 0; o < dag.outputs().size(); ++o) {
            const double y = data.targets(i, o);
            const double yhat = f.outputs[o];
            if (kind == LossKind::mse) {
                out.value += 0.5 * (yhat - y) * (yhat - y);
                adj[dag.outputs()[o]] = yhat - y;
            } else {
                out.value += bce_with_logit(yhat, y);
                adj[dag.outputs()[o]] = sigmoid(yhat) - y;
            }
        }

        // Reverse sweep: adj[v] holds dL/dz_v once every successor is done.
        for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
            const NodeId v = *it;
            if (dag.role(v) == Role::hidden)
                adj[v] *= act.slope(f.preact_hidden[dag.hidden_row(v)]);
            for (EdgeId e : dag.in_edges(v)) {
                const NodeId u = dag.edge(e).src;
                out.grad[e] += adj[v] * f.activations[u];
                adj[u] += adj[v] * theta[e];
            }
        }
    }

    out.value /= n;
    for (double& g : out.grad) g /= n;
    return out;
}

Parameters gradient(const Dag& dag, const Activation& act, const Parameters& theta,
                    const Dataset& data, LossKind kind) {
    return loss_and_gradient(dag, act, theta, data, kind).grad;
}

Parameters gf_step(const Parameters& theta, const Parameters& g, double lr) {
    if (lr <= 0.0) throw InvalidArgument("learning rate must be positive");
    if (theta.size() != g.size()) throw InvalidArgument("parameter/gradient size mismatch");
    Parameters next(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) next[i] = theta[i] - lr * g[i];
    return next;
}

Dag with_bias(const Dag& dag) {
    std::vector<Role> roles(dag.num_nodes());
    for (NodeId v = 0; v < dag.num_nodes(); ++v) roles[v] = dag.role(v);
    std::vector<Edge> edges = dag.edges();

    const NodeId bias = dag.num_nodes();
    roles.push_back(Role::input);
    for (NodeId h : dag.hidden())
        edges.push_back({static_cast<EdgeId>(edges.size()), bias, h});
    return Dag(std::move(roles), std::move(edges));
}

}  // namespace dagnet
