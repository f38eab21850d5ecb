#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dagnet/linalg.hpp"

namespace dagnet {

using NodeId = int;
using EdgeId = int;

enum class Role { input, hidden, output };

std::string to_string(Role r);
Role role_from_string(const std::string& s);

struct Edge {
    EdgeId id;
    NodeId src;
    NodeId dst;
};

/// Feed-forward computation graph. Node ids are dense 0..n-1, edge ids dense
/// 0..m-1; every ordering exposed here is by ascending id so downstream
/// matrices and enumerations are reproducible.
///
/// Validity (checked at construction):
///   - acyclic,
///   - input nodes have in-degree 0, output nodes out-degree 0,
///   - every hidden node has in-degree >= 1 and out-degree >= 1,
///   - no duplicate (src, dst) pairs.
/// Direct input->output edges are allowed.
class Dag {
public:
    // roles[i] is the role of node i; edges[k].id must equal k.
    Dag(std::vector<Role> roles, std::vector<Edge> edges);

    int num_nodes() const { return static_cast<int>(roles_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }

    Role role(NodeId v) const { return roles_[v]; }
    bool is_hidden(NodeId v) const { return roles_[v] == Role::hidden; }

    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(EdgeId e) const { return edges_[e]; }

    const std::vector<NodeId>& inputs() const { return inputs_; }
    const std::vector<NodeId>& outputs() const { return outputs_; }
    const std::vector<NodeId>& hidden() const { return hidden_; }

    // Incident edge ids, ascending.
    const std::vector<EdgeId>& in_edges(NodeId v) const { return in_edges_[v]; }
    const std::vector<EdgeId>& out_edges(NodeId v) const { return out_edges_[v]; }
    int in_degree(NodeId v) const { return static_cast<int>(in_edges_[v].size()); }
    int out_degree(NodeId v) const { return static_cast<int>(out_edges_[v].size()); }

    // Row index of a hidden node in the reduced incidence matrix, -1 otherwise.
    int hidden_row(NodeId v) const { return hidden_row_[v]; }

    const std::vector<NodeId>& topological_order() const { return topo_; }

private:
    std::vector<Role> roles_;
    std::vector<Edge> edges_;
    std::vector<std::vector<EdgeId>> in_edges_;
    std::vector<std::vector<EdgeId>> out_edges_;
    std::vector<NodeId> inputs_, outputs_, hidden_;
    std::vector<int> hidden_row_;
    std::vector<NodeId> topo_;
};

/// Node-edge incidence with boundary (input/output) rows removed.
/// Row r corresponds to hidden_nodes[r]; column e to edge id e.
/// Entry is +1 where the edge ends at the row's node, -1 where it starts.
struct ReducedIncidence {
    std::vector<NodeId> hidden_nodes;
    Matrix mat;
};

ReducedIncidence reduced_incidence(const Dag& dag);

// Kahn's algorithm, ties broken by ascending node id. Throws CycleDetected.
std::vector<NodeId> topological_order(std::vector<Role> roles, const std::vector<Edge>& edges);

struct Bottlenecks {
    std::vector<NodeId> in_bottlenecks;   // hidden nodes with in-degree 1
    std::vector<NodeId> out_bottlenecks;  // hidden nodes with out-degree 1
};

Bottlenecks bottlenecks(const Dag& dag);

/// Hidden nodes (v included) whose every path to an output runs through v.
/// v must have out-degree 1 unless force is set.
std::vector<NodeId> pure_ancestors(const Dag& dag, NodeId v, bool force = false);

/// Mirror of pure_ancestors under edge reversal: hidden nodes reachable only
/// through v from the inputs. v must have in-degree 1 unless force is set.
std::vector<NodeId> pure_descendants(const Dag& dag, NodeId v, bool force = false);

inline constexpr int kStableSetCap = 20;

/// All nonempty T inside the pure-ancestor set of v such that every member
/// other than v keeps all its out-neighbours inside T. Sorted by size, then
/// lexicographically. Throws TooLarge past `cap` pure ancestors.
std::vector<std::vector<NodeId>> enumerate_forward_stable_sets(const Dag& dag, NodeId v,
                                                               int cap = kStableSetCap);

/// Same with in-neighbours over the pure-descendant set of v.
std::vector<std::vector<NodeId>> enumerate_backward_stable_sets(const Dag& dag, NodeId v,
                                                                int cap = kStableSetCap);

/// Components of the undirected graph obtained by merging all inputs and
/// outputs into one super node and deleting `zero_edges`. Isolated hidden
/// nodes count. zero_edges is a mask over edge ids.
int quotient_components(const Dag& dag, const std::vector<std::uint8_t>& zero_edge_mask);
int quotient_components(const Dag& dag, const std::vector<EdgeId>& zero_edges);

/// Hidden-node groups cut off from the super node, one sorted set per
/// component, ordered by smallest member. Empty for a regular edge pattern.
std::vector<std::vector<NodeId>> quotient_cut_sets(const Dag& dag,
                                                   const std::vector<std::uint8_t>& zero_edge_mask);

}  // namespace dagnet
