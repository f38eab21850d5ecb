#include "dagnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dagnet/errors.hpp"
#include "dagnet/invariant.hpp"
#include "dagnet/singularity.hpp"

namespace dagnet {

std::string to_string(Regularizer r) {
    switch (r) {
        case Regularizer::none: return "none";
        case Regularizer::l1: return "l1";
        case Regularizer::l2: return "l2";
        case Regularizer::nuclear: return "nuclear";
    }
    return "?";
}

Regularizer regularizer_from_string(const std::string& s) {
    if (s == "none") return Regularizer::none;
    if (s == "l1") return Regularizer::l1;
    if (s == "l2") return Regularizer::l2;
    if (s == "nuclear") return Regularizer::nuclear;
    throw ParseError("unknown regularizer '" + s + "'");
}

std::string to_string(PruneOrder o) {
    return o == PruneOrder::s ? "s" : "s_max";
}

PruneOrder prune_order_from_string(const std::string& s) {
    if (s == "s") return PruneOrder::s;
    if (s == "s_max") return PruneOrder::s_max;
    throw ParseError("unknown prune order '" + s + "'");
}

double reference_alpha(Regularizer r) {
    switch (r) {
        case Regularizer::none: return 0.0;
        case Regularizer::l1: return kReferenceAlphaL1;
        case Regularizer::l2: return kReferenceAlphaL2;
        case Regularizer::nuclear: return kReferenceAlphaNuclear;
    }
    return 0.0;
}

InitScheme InitScheme::explicit_theta(Parameters v) {
    InitScheme s;
    s.kind = Kind::explicit_values;
    s.values = std::move(v);
    return s;
}

NullModelMode NullModelMode::monte_carlo(long n, std::uint64_t seed) {
    if (n < 1) throw InvalidArgument("monte carlo needs at least one sample");
    return {Kind::monte_carlo, n, seed};
}

namespace {

// Explicit transforms over mt19937_64 output so draws do not depend on the
// standard library's distribution implementations.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double normal01(std::mt19937_64& rng) {
    const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace

Parameters init_parameters(const Dag& dag, const InitScheme& init, std::uint64_t seed) {
    const int m = dag.num_edges();
    switch (init.kind) {
        case InitScheme::Kind::explicit_values:
            if (init.values.size() != static_cast<std::size_t>(m))
                throw InvalidArgument("explicit init has wrong parameter count");
            return init.values;
        case InitScheme::Kind::uniform: {
            if (!(init.a <= init.b)) throw InvalidArgument("uniform init needs a <= b");
            std::mt19937_64 rng(seed);
            Parameters theta(m);
            for (double& t : theta) t = init.a + (init.b - init.a) * uniform01(rng);
            return theta;
        }
        case InitScheme::Kind::normal: {
            if (!(init.s >= 0.0)) throw InvalidArgument("normal init needs s >= 0");
            std::mt19937_64 rng(seed);
            Parameters theta(m);
            for (double& t : theta) t = init.s * normal01(rng);
            return theta;
        }
    }
    throw InvalidArgument("unknown init scheme");
}

PruneScores prune_scores(const Dag& dag, const Parameters& theta) {
    PruneScores out;
    out.hidden_nodes = dag.hidden();
    out.s.reserve(out.hidden_nodes.size());
    out.s_max.reserve(out.hidden_nodes.size());
    for (NodeId v : out.hidden_nodes) {
        double in_sq = 0.0, out_sq = 0.0;
        for (EdgeId e : dag.in_edges(v)) in_sq += theta[e] * theta[e];
        for (EdgeId e : dag.out_edges(v)) out_sq += theta[e] * theta[e];
        out.s.push_back(in_sq * out_sq);
        out.s_max.push_back(std::max(in_sq, out_sq));
    }
    return out;
}

namespace {

struct RegTerm {
    double value = 0.0;
    Parameters grad;
};

RegTerm regularizer_term(const ReducedIncidence& bt, const Parameters& theta, Regularizer reg) {
    RegTerm term;
    term.grad.assign(theta.size(), 0.0);
    switch (reg) {
        case Regularizer::none:
            break;
        case Regularizer::l1:
            for (std::size_t e = 0; e < theta.size(); ++e) {
                term.value += std::abs(theta[e]);
                // Subgradient 0 at 0 keeps exact zeros pinned.
                term.grad[e] = theta[e] > 0.0 ? 1.0 : (theta[e] < 0.0 ? -1.0 : 0.0);
            }
            break;
        case Regularizer::l2:
            for (std::size_t e = 0; e < theta.size(); ++e) {
                term.value += theta[e] * theta[e];
                term.grad[e] = 2.0 * theta[e];
            }
            break;
        case Regularizer::nuclear: {
            NuclearNormResult n = nuclear_norm_and_grad(bt, theta);
            term.value = n.value;
            term.grad = std::move(n.grad);
            break;
        }
    }
    return term;
}

Snapshot take_snapshot(const Dag& dag, const ReducedIncidence& bt, const Parameters& theta,
                       const BalanceVector& c0, int step, double task_loss, double reg_value) {
    Snapshot s;
    s.step = step;
    s.task_loss = task_loss;
    s.reg_value = reg_value;
    s.c = balance(bt, theta);
    s.drift = 0.0;
    for (std::size_t i = 0; i < s.c.size(); ++i)
        s.drift = std::max(s.drift, std::abs(s.c[i] - c0[i]));
    s.sigma = singular_values(jacobian(bt, theta));
    s.null_sigma_count = static_cast<int>(std::count_if(
        s.sigma.begin(), s.sigma.end(), [](double v) { return v <= kNullSigmaThreshold; }));
    PruneScores scores = prune_scores(dag, theta);
    s.score_s = std::move(scores.s);
    s.score_smax = std::move(scores.s_max);
    return s;
}

}  // namespace

TrainResult train(const Dag& dag, const Dataset& data, const TrainConfig& cfg) {
    if (cfg.steps < 1) throw InvalidArgument("steps must be >= 1");
    if (cfg.lr <= 0.0) throw InvalidArgument("learning rate must be positive");
    if (cfg.alpha < 0.0) throw InvalidArgument("alpha must be nonnegative");
    if (cfg.log_every < 1) throw InvalidArgument("log_every must be >= 1");
    if (cfg.batch_size < 0 || cfg.batch_size > data.size())
        throw InvalidArgument("batch_size must lie in 0..N");
    validate_dataset(dag, data);

    const ReducedIncidence bt = reduced_incidence(dag);
    Parameters theta = init_parameters(dag, cfg.init, cfg.seed);

    TrainResult out;
    out.record.hidden_nodes = dag.hidden();
    out.record.c0 = balance(bt, theta);

    const bool use_reg = cfg.reg != Regularizer::none && cfg.alpha > 0.0;

    {
        const double l0 = loss(dag, cfg.act, theta, data, cfg.loss);
        const double r0 = use_reg ? regularizer_term(bt, theta, cfg.reg).value : 0.0;
        out.record.snapshots.push_back(
            take_snapshot(dag, bt, theta, out.record.c0, 0, l0, r0));
    }

    // Scratch slice for mini-batch steps; windows advance cyclically so a
    // fixed config replays the identical sample sequence.
    const int batch = cfg.batch_size == 0 ? data.size() : cfg.batch_size;
    Dataset slice{Matrix(batch, data.inputs.cols()), Matrix(batch, data.targets.cols())};
    long cursor = 0;

    for (int step = 1; step <= cfg.steps; ++step) {
        const Dataset* step_data = &data;
        if (batch < data.size()) {
            for (int r = 0; r < batch; ++r) {
                const int src = static_cast<int>((cursor + r) % data.size());
                for (std::size_t j = 0; j < data.inputs.cols(); ++j)
                    slice.inputs(r, j) = data.inputs(src, j);
                for (std::size_t j = 0; j < data.targets.cols(); ++j)
                    slice.targets(r, j) = data.targets(src, j);
            }
            cursor += batch;
            step_data = &slice;
        }
        LossAndGradient task = loss_and_gradient(dag, cfg.act, theta, *step_data, cfg.loss);
        if (!std::isfinite(task.value))
            throw DivergenceDetected("loss is not finite at step " + std::to_string(step));

        if (use_reg) {
            const RegTerm reg = regularizer_term(bt, theta, cfg.reg);
            for (std::size_t e = 0; e < theta.size(); ++e)
                task.grad[e] += cfg.alpha * reg.grad[e];
        }
        theta = gf_step(theta, task.grad, cfg.lr);

        if (step % cfg.log_every == 0 || step == cfg.steps) {
            const double l = loss(dag, cfg.act, theta, data, cfg.loss);
            const double r = use_reg ? regularizer_term(bt, theta, cfg.reg).value : 0.0;
            if (!std::isfinite(l))
                throw DivergenceDetected("loss is not finite at step " + std::to_string(step));
            out.record.snapshots.push_back(take_snapshot(dag, bt, theta, out.record.c0, step, l, r));
        }
    }

    out.theta = std::move(theta);
    return out;
}

PruneOutcome prune_nodes(const Dag& dag, const Parameters& theta,
                         const std::vector<NodeId>& victims) {
    if (theta.size() != static_cast<std::size_t>(dag.num_edges()))
        throw InvalidArgument("parameter count mismatch");

    std::vector<bool> dead(dag.num_nodes(), false);
    for (NodeId v : victims) {
        if (v < 0 || v >= dag.num_nodes() || !dag.is_hidden(v))
            throw InvalidArgument("can only prune hidden nodes");
        dead[v] = true;
    }

    std::vector<NodeId> stranded;
    // Removing a neuron can starve another hidden node of inputs or outputs;
    // keep sweeping until the survivor set is a valid graph again.
    bool changed = true;
    while (changed) {
        changed = false;
        for (NodeId v : dag.hidden()) {
            if (dead[v]) continue;
            int in = 0, out = 0;
            for (EdgeId e : dag.in_edges(v))
                if (!dead[dag.edge(e).src]) ++in;
            for (EdgeId e : dag.out_edges(v))
                if (!dead[dag.edge(e).dst]) ++out;
            if (in == 0 || out == 0) {
                dead[v] = true;
                stranded.push_back(v);
                changed = true;
            }
        }
    }

    PruneOutcome out{Dag({Role::input, Role::output}, {}), {}, {}, {}, {}, {}};

    std::vector<NodeId> new_id(dag.num_nodes(), -1);
    std::vector<Role> roles;
    for (NodeId v = 0; v < dag.num_nodes(); ++v) {
        if (dead[v]) continue;
        new_id[v] = static_cast<NodeId>(roles.size());
        roles.push_back(dag.role(v));
        out.node_map.push_back(v);
    }

    std::vector<Edge> edges;
    Parameters kept_theta;
    for (const Edge& e : dag.edges()) {
        if (dead[e.src] || dead[e.dst]) continue;
        edges.push_back({static_cast<EdgeId>(edges.size()), new_id[e.src], new_id[e.dst]});
        kept_theta.push_back(theta[e.id]);
        out.edge_map.push_back(e.id);
    }

    out.dag = Dag(std::move(roles), std::move(edges));
    out.theta = std::move(kept_theta);
    out.removed = victims;
    std::sort(out.removed.begin(), out.removed.end());
    out.removed_stranded = std::move(stranded);
    std::sort(out.removed_stranded.begin(), out.removed_stranded.end());
    return out;
}

PruneOutcome prune_neurons(const Dag& dag, const Parameters& theta, PruneOrder order, int k) {
    const int h = static_cast<int>(dag.hidden().size());
    if (k < 0 || k > h) throw InvalidArgument("prune count out of range");

    const PruneScores scores = prune_scores(dag, theta);
    const std::vector<double>& key = order == PruneOrder::s ? scores.s : scores.s_max;
    std::vector<int> idx(h);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (key[a] != key[b]) return key[a] < key[b];
        return scores.hidden_nodes[a] < scores.hidden_nodes[b];
    });

    std::vector<NodeId> victims;
    victims.reserve(k);
    for (int i = 0; i < k; ++i) victims.push_back(scores.hidden_nodes[idx[i]]);
    return prune_nodes(dag, theta, victims);
}

std::vector<std::pair<int, double>> prune_curve(const Dag& dag, const Activation& act,
                                                const Parameters& theta, const Dataset& data,
                                                LossKind kind, PruneOrder order) {
    const int h = static_cast<int>(dag.hidden().size());
    std::vector<std::pair<int, double>> curve;
    curve.reserve(h + 1);
    for (int k = 0; k <= h; ++k) {
        const PruneOutcome pruned = prune_neurons(dag, theta, order, k);
        // Surviving inputs/outputs keep their relative order, so columns bind.
        curve.emplace_back(k, loss(pruned.dag, act, pruned.theta, data, kind));
    }
    return curve;
}

namespace {

// A neuron survives an edge-drop pattern only if it still lies on a directed
// input-to-output path; losing either side makes it dead weight.
int disconnected_count(const Dag& dag, const std::vector<std::uint8_t>& dropped) {
    const int n = dag.num_nodes();
    std::vector<std::uint8_t> fwd(n, 0), bwd(n, 0);
    for (NodeId v : dag.inputs()) fwd[v] = 1;
    for (NodeId v : dag.topological_order())
        for (EdgeId e : dag.out_edges(v))
            if (!dropped[e] && fwd[v]) fwd[dag.edge(e).dst] = 1;
    for (NodeId v : dag.outputs()) bwd[v] = 1;
    const auto& topo = dag.topological_order();
    for (auto it = topo.rbegin(); it != topo.rend(); ++it)
        for (EdgeId e : dag.in_edges(*it))
            if (!dropped[e] && bwd[*it]) bwd[dag.edge(e).src] = 1;

    int count = 0;
    for (NodeId v : dag.hidden())
        if (!fwd[v] || !bwd[v]) ++count;
    return count;
}

}  // namespace

std::vector<std::pair<int, double>> null_model(const Dag& dag, double p,
                                               const NullModelMode& mode) {
    if (p < 0.0 || p > 1.0) throw InvalidArgument("drop probability must lie in [0,1]");
    const int m = dag.num_edges();
    const int h = static_cast<int>(dag.hidden().size());

    std::vector<double> prob_count(h + 1, 0.0);
    std::vector<std::uint8_t> dropped(m, 0);

    if (mode.kind == NullModelMode::Kind::exact) {
        if (m > kNullModelExactCap)
            throw TooLarge("exact null model over " + std::to_string(m) + " edges, cap is " +
                           std::to_string(kNullModelExactCap));
        // Binomial weight per drop count; p = 0 or 1 zeroes all mixed terms.
        std::vector<double> p_pow(m + 1, 1.0), q_pow(m + 1, 1.0);
        for (int i = 1; i <= m; ++i) {
            p_pow[i] = p_pow[i - 1] * p;
            q_pow[i] = q_pow[i - 1] * (1.0 - p);
        }
        const std::uint64_t total = 1ull << m;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            int d = 0;
            for (int e = 0; e < m; ++e) {
                dropped[e] = (mask >> e) & 1ull ? 1 : 0;
                d += dropped[e];
            }
            const double w = p_pow[d] * q_pow[m - d];
            if (w == 0.0) continue;
            prob_count[disconnected_count(dag, dropped)] += w;
        }
    } else {
        std::mt19937_64 rng(mode.seed);
        for (long i = 0; i < mode.samples; ++i) {
            for (int e = 0; e < m; ++e) dropped[e] = uniform01(rng) < p ? 1 : 0;
            prob_count[disconnected_count(dag, dropped)] += 1.0;
        }
        for (double& v : prob_count) v /= static_cast<double>(mode.samples);
    }

    std::vector<std::pair<int, double>> tail(h + 1);
    double acc = 0.0;
    for (int k = h; k >= 0; --k) {
        acc += prob_count[k];
        tail[k] = {k, std::clamp(acc, 0.0, 1.0)};  // guard accumulation dust
    }
    return tail;
}

double estimate_edge_drop_rate(const Parameters& theta, double tau) {
    if (theta.empty()) return 0.0;
    int n = 0;
    for (double t : theta)
        if (std::abs(t) <= tau) ++n;
    return static_cast<double>(n) / static_cast<double>(theta.size());
}

}  // namespace dagnet
