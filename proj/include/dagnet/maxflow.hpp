#pragma once

#include <vector>

namespace dagnet {

/// Dinic max-flow on double capacities. Small deterministic instances only:
/// adjacency keeps insertion order, residuals below kEps count as saturated.
class Dinic {
public:
    static constexpr double kEps = 1e-12;

    explicit Dinic(int node_count);

    // Returns an arc handle usable with flow_on() after max_flow().
    int add_arc(int from, int to, double capacity);

    double max_flow(int source, int sink);

    double flow_on(int arc_handle) const;

    // Nodes reachable from the last max_flow() source in the residual graph.
    std::vector<bool> residual_reachable() const;

private:
    struct Arc {
        int to;
        double cap;
        int rev;  // index of the reverse arc in graph_[to]
    };

    bool bfs_levels(int s, int t);
    double push(int v, int t, double limit);

    int n_;
    std::vector<std::vector<Arc>> graph_;
    std::vector<std::pair<int, int>> handles_;  // arc handle -> (node, slot)
    std::vector<double> initial_cap_;
    std::vector<int> level_;
    std::vector<int> iter_;
    int last_source_ = -1;
};

}  // namespace dagnet
