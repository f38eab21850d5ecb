#pragma once

#include <limits>
#include <string>
#include <vector>

#include "dagnet/dag.hpp"
#include "dagnet/net.hpp"

namespace dagnet {

// Per-hidden-node conserved quantity, indexed like ReducedIncidence rows.
using BalanceVector = std::vector<double>;

// Sign strictness when turning balance values into flow bounds: |c| <= this
// is treated as zero so float noise cannot create phantom arcs.
inline constexpr double kSignTol = 1e-12;
// Slack for feasibility decisions and bound checks on real-valued flows.
inline constexpr double kFeasTol = 1e-9;

/// c = Bt (theta ⊙ theta).
BalanceVector balance(const ReducedIncidence& bt, const Parameters& theta);
BalanceVector balance(const Dag& dag, const Parameters& theta);

/// Bt (theta ⊙ g); zero at every differentiable point of the loss.
std::vector<double> conservation_residual(const ReducedIncidence& bt, const Parameters& theta,
                                          const Parameters& g);

/// Nonnegative parameters with balance c on any valid graph: start from the
/// all-ones squared-weight vector and push each node's deficit along a single
/// input-to-node (or node-to-output) path, which leaves every other balance
/// untouched. Paths are shortest with smallest-id tie-breaks.
Parameters feasible_construct(const Dag& dag, const BalanceVector& c);

enum class Side { out, in };
std::string to_string(Side s);

enum class ArcTag { internal, incoming, source, sink, circulation };
std::string to_string(ArcTag t);

struct FlowArc {
    int src;      // index into FlowProblem::node_names
    int dst;
    double lower;
    double upper;  // +inf for unbounded
    ArcTag tag;
    EdgeId origin_edge;  // graph edge behind internal/incoming arcs, else -1
};

/// Circulation-form feasibility problem induced at a bottleneck: members of
/// the pure set plus two extra nodes s and t. Parallel arcs are kept.
struct FlowProblem {
    std::vector<NodeId> members;       // pure set, ascending
    int s;                             // index members.size()
    int t;                             // index members.size() + 1
    std::vector<FlowArc> arcs;
    int node_count() const { return static_cast<int>(members.size()) + 2; }
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Builds the feasibility problem at bottleneck v. For side == out the pure
/// set is pure_ancestors(v): graph edges inside the set become free internal
/// arcs, edges crossing into the set become free arcs out of s (one per
/// graph edge), nodes with c < 0 get a pinned supply arc from s, nodes with
/// c > 0 a pinned demand arc to t, plus the free circulation arc (t, s).
/// side == in applies the same construction to the edge-reversed graph with
/// c negated.
FlowProblem build_flow_problem(const Dag& dag, const BalanceVector& c, NodeId v, Side side);

struct CutCertificate {
    std::vector<NodeId> t_side;  // members on the deficient side
    double value;                // sum of lower bounds into t_side minus capacity out; > 0
};

struct CirculationResult {
    bool feasible;
    std::vector<double> flow;  // per arc, only when feasible
    CutCertificate cut;        // only when infeasible
};

/// Decides feasibility by saturating lower bounds and running max-flow on the
/// residual demand graph. Infeasible instances yield a positive cut read off
/// the residual reachable set.
CirculationResult solve_circulation(const FlowProblem& p);

struct Witness {
    NodeId bottleneck;
    Side side;
    std::vector<NodeId> set;  // stable set violating the sign condition
    double c_sum;
};

struct ConnectednessReport {
    bool connected;
    std::vector<Witness> witnesses;  // ordered by bottleneck id; empty iff connected
};

enum class Backend { flow, enumerate };
std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);

/// Connectedness of the solution set of Bt theta^2 = c. The enumerate backend
/// checks the sign of the c-sum over every stable set of every bottleneck;
/// the flow backend solves the induced circulation per bottleneck and
/// reconstructs witnesses from positive cuts (re-verified, with enumeration
/// as fallback). One witness is reported per violated bottleneck side.
ConnectednessReport is_connected(const Dag& dag, const BalanceVector& c,
                                 Backend backend = Backend::flow);

inline constexpr int kZeroSumCap = 25;

/// All nonempty hidden-node subsets whose c-sum has magnitude <= tol, sorted
/// by size then lexicographically. An empty result certifies the invariant
/// set carries no singular points.
std::vector<std::vector<NodeId>> zero_sum_subsets(const Dag& dag, const BalanceVector& c,
                                                  double tol);

}  // namespace dagnet
