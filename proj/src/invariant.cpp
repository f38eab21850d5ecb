#include "dagnet/invariant.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "dagnet/errors.hpp"
#include "dagnet/maxflow.hpp"

namespace dagnet {

std::string to_string(Side s) {
    return s == Side::out ? "out" : "in";
}

std::string to_string(ArcTag t) {
    switch (t) {
        case ArcTag::internal: return "internal";
        case ArcTag::incoming: return "incoming";
        case ArcTag::source: return "source";
        case ArcTag::sink: return "sink";
        case ArcTag::circulation: return "circulation";
    }
    return "?";
}

std::string to_string(Backend b) {
    return b == Backend::flow ? "flow" : "enumerate";
}

Backend backend_from_string(const std::string& s) {
    if (s == "flow") return Backend::flow;
    if (s == "enumerate") return Backend::enumerate;
    throw ParseError("unknown backend '" + s + "'");
}

BalanceVector balance(const ReducedIncidence& bt, const Parameters& theta) {
    if (theta.size() != bt.mat.cols()) throw InvalidArgument("parameter count mismatch");
    BalanceVector c(bt.mat.rows(), 0.0);
    for (std::size_t r = 0; r < bt.mat.rows(); ++r)
        for (std::size_t e = 0; e < theta.size(); ++e)
            if (const double b = bt.mat(r, e); b != 0.0) c[r] += b * theta[e] * theta[e];
    return c;
}

BalanceVector balance(const Dag& dag, const Parameters& theta) {
    if (theta.size() != static_cast<std::size_t>(dag.num_edges()))
        throw InvalidArgument("parameter count mismatch");
    BalanceVector c(dag.hidden().size(), 0.0);
    for (const Edge& e : dag.edges()) {
        const double sq = theta[e.id] * theta[e.id];
        if (int r = dag.hidden_row(e.dst); r >= 0) c[r] += sq;
        if (int r = dag.hidden_row(e.src); r >= 0) c[r] -= sq;
    }
    return c;
}

std::vector<double> conservation_residual(const ReducedIncidence& bt, const Parameters& theta,
                                          const Parameters& g) {
    if (theta.size() != bt.mat.cols() || g.size() != bt.mat.cols())
        throw InvalidArgument("dimension mismatch");
    std::vector<double> r(bt.mat.rows(), 0.0);
    for (std::size_t row = 0; row < bt.mat.rows(); ++row)
        for (std::size_t e = 0; e < theta.size(); ++e)
            if (const double b = bt.mat(row, e); b != 0.0) r[row] += b * theta[e] * g[e];
    return r;
}

namespace {

// Shortest path between v and the boundary role, smallest-id tie-breaks.
// toward_inputs: walk in-edges up from v; otherwise out-edges down.
// Returns the edge ids of the path.
std::vector<EdgeId> boundary_path(const Dag& dag, NodeId v, bool toward_inputs) {
    const Role stop = toward_inputs ? Role::input : Role::output;
    std::vector<EdgeId> via_edge(dag.num_nodes(), -1);
    std::vector<bool> seen(dag.num_nodes(), false);
    std::queue<NodeId> q;
    seen[v] = true;
    q.push(v);
    NodeId found = -1;
    while (!q.empty() && found < 0) {
        const NodeId u = q.front();
        q.pop();
        auto nbrs = toward_inputs ? dag.in_edges(u) : dag.out_edges(u);  // ascending edge id
        std::sort(nbrs.begin(), nbrs.end(), [&](EdgeId a, EdgeId b) {
            const NodeId na = toward_inputs ? dag.edge(a).src : dag.edge(a).dst;
            const NodeId nb = toward_inputs ? dag.edge(b).src : dag.edge(b).dst;
            return na < nb;
        });
        for (EdgeId e : nbrs) {
            const NodeId w = toward_inputs ? dag.edge(e).src : dag.edge(e).dst;
            if (seen[w]) continue;
            seen[w] = true;
            via_edge[w] = e;
            if (dag.role(w) == stop) {
                found = w;
                break;
            }
            q.push(w);
        }
    }
    if (found < 0) throw InvalidGraph("no boundary path from node " + std::to_string(v));
    std::vector<EdgeId> path;
    for (NodeId u = found; u != v;) {
        const EdgeId e = via_edge[u];
        path.push_back(e);
        u = toward_inputs ? dag.edge(e).dst : dag.edge(e).src;
    }
    return path;
}

}  // namespace

Parameters feasible_construct(const Dag& dag, const BalanceVector& c) {
    if (c.size() != dag.hidden().size()) throw InvalidArgument("balance vector size mismatch");

    // x holds squared weights; starts at 1 everywhere.
    std::vector<double> x(dag.num_edges(), 1.0);
    BalanceVector base = balance(dag, Parameters(dag.num_edges(), 1.0));

    for (std::size_t r = 0; r < c.size(); ++r) {
        const NodeId v = dag.hidden()[r];
        const double delta = c[r] - base[r];
        if (delta == 0.0) continue;
        // Raising in-flow along an input path adds delta at v only; raising
        // out-flow along an output path subtracts it.
        const auto path = boundary_path(dag, v, /*toward_inputs=*/delta > 0.0);
        for (EdgeId e : path) x[e] += std::abs(delta);
    }

    Parameters theta(dag.num_edges());
    for (int e = 0; e < dag.num_edges(); ++e) theta[e] = std::sqrt(x[e]);
    return theta;
}

FlowProblem build_flow_problem(const Dag& dag, const BalanceVector& c, NodeId v, Side side) {
    if (c.size() != dag.hidden().size()) throw InvalidArgument("balance vector size mismatch");
    const bool out_side = side == Side::out;
    if (!dag.is_hidden(v) || (out_side ? dag.out_degree(v) : dag.in_degree(v)) != 1)
        throw NotABottleneck("node " + std::to_string(v) + " is not a " + to_string(side) +
                             "-bottleneck");

    FlowProblem p;
    p.members = out_side ? pure_ancestors(dag, v) : pure_descendants(dag, v);
    p.s = static_cast<int>(p.members.size());
    p.t = p.s + 1;

    std::vector<int> pos(dag.num_nodes(), -1);
    for (std::size_t i = 0; i < p.members.size(); ++i) pos[p.members[i]] = static_cast<int>(i);

    // Effective balance on the analyzed side; the in-problem is the
    // out-problem of the reversed graph with c negated.
    auto c_of = [&](NodeId w) {
        const double val = c[dag.hidden_row(w)];
        return out_side ? val : -val;
    };

    for (const Edge& e : dag.edges()) {
        const NodeId tail = out_side ? e.src : e.dst;
        const NodeId head = out_side ? e.dst : e.src;
        if (pos[head] < 0) continue;  // edges leaving the pure set never appear
        if (pos[tail] >= 0) {
            p.arcs.push_back({pos[tail], pos[head], 0.0, kInf, ArcTag::internal, e.id});
        } else {
            p.arcs.push_back({p.s, pos[head], 0.0, kInf, ArcTag::incoming, e.id});
        }
    }
    for (std::size_t i = 0; i < p.members.size(); ++i) {
        const double cw = c_of(p.members[i]);
        if (cw < -kSignTol)
            p.arcs.push_back({p.s, static_cast<int>(i), -cw, -cw, ArcTag::source, -1});
        else if (cw > kSignTol)
            p.arcs.push_back({static_cast<int>(i), p.t, cw, cw, ArcTag::sink, -1});
    }
    p.arcs.push_back({p.t, p.s, 0.0, kInf, ArcTag::circulation, -1});
    return p;
}

namespace {

void validate_problem(const FlowProblem& p) {
    int circulation_arcs = 0;
    for (const FlowArc& a : p.arcs) {
        if (a.src < 0 || a.src >= p.node_count() || a.dst < 0 || a.dst >= p.node_count())
            throw MalformedProblem("arc endpoint out of range");
        if (!(a.lower >= 0.0) || std::isnan(a.upper))
            throw MalformedProblem("arc bounds must be nonnegative reals");
        if (a.lower > a.upper) throw MalformedProblem("arc lower bound exceeds upper bound");
        if (a.tag == ArcTag::circulation) ++circulation_arcs;
    }
    if (circulation_arcs != 1) throw MalformedProblem("expected exactly one circulation arc");
}

}  // namespace

CirculationResult solve_circulation(const FlowProblem& p) {
    validate_problem(p);
    const int n = p.node_count();

    // Any feasible circulation routes at most the total pinned supply over a
    // free arc, so this finite cap is equivalent to an infinite bound and
    // keeps flow reconstruction away from catastrophic cancellation.
    double big_cap = 1.0;
    for (const FlowArc& a : p.arcs) big_cap += a.lower;

    // Saturate lower bounds, then ask a max-flow to route the excesses.
    Dinic net(n + 2);
    const int super_s = n;
    const int super_t = n + 1;
    std::vector<double> excess(n, 0.0);
    std::vector<int> arc_handle(p.arcs.size(), -1);
    for (std::size_t i = 0; i < p.arcs.size(); ++i) {
        const FlowArc& a = p.arcs[i];
        const double cap = std::isinf(a.upper) ? big_cap : a.upper - a.lower;
        arc_handle[i] = net.add_arc(a.src, a.dst, cap);
        excess[a.dst] += a.lower;
        excess[a.src] -= a.lower;
    }
    double demand = 0.0;
    for (int v = 0; v < n; ++v) {
        if (excess[v] > 0.0) {
            net.add_arc(super_s, v, excess[v]);
            demand += excess[v];
        } else if (excess[v] < 0.0) {
            net.add_arc(v, super_t, -excess[v]);
        }
    }

    const double routed = net.max_flow(super_s, super_t);

    CirculationResult result;
    result.feasible = demand - routed <= kFeasTol;
    if (result.feasible) {
        result.flow.resize(p.arcs.size());
        for (std::size_t i = 0; i < p.arcs.size(); ++i)
            result.flow[i] = p.arcs[i].lower + net.flow_on(arc_handle[i]);
        return result;
    }

    // Residual-reachable nodes form the deficient side of a positive cut.
    const std::vector<bool> reach = net.residual_reachable();
    double value = 0.0;
    for (const FlowArc& a : p.arcs) {
        const bool src_in = reach[a.src];
        const bool dst_in = reach[a.dst];
        if (!src_in && dst_in) value += a.lower;
        if (src_in && !dst_in) value -= std::isinf(a.upper) ? big_cap : a.upper;
    }
    result.cut.value = value;
    for (std::size_t i = 0; i < p.members.size(); ++i)
        if (reach[i]) result.cut.t_side.push_back(p.members[i]);
    return result;
}

namespace {

double sum_over(const Dag& dag, const BalanceVector& c, const std::vector<NodeId>& set) {
    double s = 0.0;
    for (NodeId v : set) s += c[dag.hidden_row(v)];
    return s;
}

// A violating stable set certifies disconnection; out-side sums must stay
// >= 0 and in-side sums <= 0.
bool violates(Side side, double sum) {
    return side == Side::out ? sum < -kFeasTol : sum > kFeasTol;
}

bool is_stable_set(const Dag& dag, NodeId v, Side side, const std::vector<NodeId>& set) {
    std::vector<bool> in_set(dag.num_nodes(), false);
    for (NodeId w : set) {
        if (!dag.is_hidden(w)) return false;
        in_set[w] = true;
    }
    for (NodeId w : set) {
        if (w == v) continue;
        const auto& edges = side == Side::out ? dag.out_edges(w) : dag.in_edges(w);
        for (EdgeId e : edges) {
            const NodeId nb = side == Side::out ? dag.edge(e).dst : dag.edge(e).src;
            if (!in_set[nb]) return false;
        }
    }
    return !set.empty();
}

// First violating stable set in (size, lexicographic) order, if any.
bool enumerate_witness(const Dag& dag, const BalanceVector& c, NodeId v, Side side, Witness& w) {
    const auto sets = side == Side::out ? enumerate_forward_stable_sets(dag, v)
                                        : enumerate_backward_stable_sets(dag, v);
    for (const auto& set : sets) {
        const double sum = sum_over(dag, c, set);
        if (violates(side, sum)) {
            w = {v, side, set, sum};
            return true;
        }
    }
    return false;
}

bool flow_witness(const Dag& dag, const BalanceVector& c, NodeId v, Side side, Witness& w) {
    const FlowProblem p = build_flow_problem(dag, c, v, side);
    const CirculationResult r = solve_circulation(p);
    if (r.feasible) return false;

    // The cut's deficient side should already be a violating stable set;
    // numerical slack demands a re-check before reporting it.
    const std::vector<NodeId>& t_side = r.cut.t_side;
    const double sum = sum_over(dag, c, t_side);
    if (is_stable_set(dag, v, side, t_side) && violates(side, sum)) {
        w = {v, side, t_side, sum};
        return true;
    }
    if (enumerate_witness(dag, c, v, side, w)) return true;
    throw Error("flow backend found bottleneck " + std::to_string(v) +
                " infeasible but no witness re-verified");
}

}  // namespace

ConnectednessReport is_connected(const Dag& dag, const BalanceVector& c, Backend backend) {
    if (c.size() != dag.hidden().size()) throw InvalidArgument("balance vector size mismatch");

    ConnectednessReport report;
    const Bottlenecks b = bottlenecks(dag);
    auto run = [&](const std::vector<NodeId>& nodes, Side side) {
        for (NodeId v : nodes) {
            Witness w;
            const bool bad = backend == Backend::flow ? flow_witness(dag, c, v, side, w)
                                                      : enumerate_witness(dag, c, v, side, w);
            if (bad) report.witnesses.push_back(std::move(w));
        }
    };
    run(b.out_bottlenecks, Side::out);
    run(b.in_bottlenecks, Side::in);

    std::stable_sort(report.witnesses.begin(), report.witnesses.end(),
                     [](const Witness& a, const Witness& b) { return a.bottleneck < b.bottleneck; });
    report.connected = report.witnesses.empty();
    return report;
}

std::vector<std::vector<NodeId>> zero_sum_subsets(const Dag& dag, const BalanceVector& c,
                                                  double tol) {
    const int k = static_cast<int>(dag.hidden().size());
    if (k > kZeroSumCap)
        throw TooLarge("zero-sum search over " + std::to_string(k) + " hidden nodes, cap is " +
                       std::to_string(kZeroSumCap));
    if (c.size() != static_cast<std::size_t>(k)) throw InvalidArgument("balance size mismatch");

    std::vector<std::vector<NodeId>> result;
    const std::uint64_t total = 1ull << k;
    for (std::uint64_t mask = 1; mask < total; ++mask) {
        double sum = 0.0;
        for (int i = 0; i < k; ++i)
            if (mask & (1ull << i)) sum += c[i];
        if (std::abs(sum) <= tol) {
            std::vector<NodeId> set;
            for (int i = 0; i < k; ++i)
                if (mask & (1ull << i)) set.push_back(dag.hidden()[i]);
            result.push_back(std::move(set));
        }
    }
    std::stable_sort(result.begin(), result.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    return result;
}

}  // namespace dagnet
