#include "dagnet/dag.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>

#include "dagnet/errors.hpp"

namespace dagnet {

std::string to_string(Role r) {
    switch (r) {
        case Role::input: return "input";
        case Role::hidden: return "hidden";
        case Role::output: return "output";
    }
    return "?";
}

Role role_from_string(const std::string& s) {
    if (s == "input") return Role::input;
    if (s == "hidden") return Role::hidden;
    if (s == "output") return Role::output;
    throw ParseError("unknown node role '" + s + "'");
}

std::vector<NodeId> topological_order(std::vector<Role> roles, const std::vector<Edge>& edges) {
    const int n = static_cast<int>(roles.size());
    std::vector<int> indeg(n, 0);
    std::vector<std::vector<NodeId>> succ(n);
    for (const Edge& e : edges) {
        ++indeg[e.dst];
        succ[e.src].push_back(e.dst);
    }
    std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
    for (NodeId v = 0; v < n; ++v)
        if (indeg[v] == 0) ready.push(v);

    std::vector<NodeId> order;
    order.reserve(n);
    while (!ready.empty()) {
        const NodeId v = ready.top();
        ready.pop();
        order.push_back(v);
        for (NodeId w : succ[v])
            if (--indeg[w] == 0) ready.push(w);
    }
    if (static_cast<int>(order.size()) != n) throw CycleDetected("graph contains a cycle");
    return order;
}

Dag::Dag(std::vector<Role> roles, std::vector<Edge> edges)
    : roles_(std::move(roles)), edges_(std::move(edges)) {
    const int n = num_nodes();
    const int m = num_edges();

    in_edges_.assign(n, {});
    out_edges_.assign(n, {});
    std::set<std::pair<NodeId, NodeId>> seen_pairs;
    for (int k = 0; k < m; ++k) {
        const Edge& e = edges_[k];
        if (e.id != k) throw InvalidGraph("edge ids must be dense 0..m-1 in order");
        if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n)
            throw InvalidGraph("edge endpoint out of range");
        if (e.src == e.dst) throw InvalidGraph("self-loop on node " + std::to_string(e.src));
        if (!seen_pairs.insert({e.src, e.dst}).second)
            throw InvalidGraph("duplicate edge " + std::to_string(e.src) + "->" +
                               std::to_string(e.dst));
        out_edges_[e.src].push_back(e.id);
        in_edges_[e.dst].push_back(e.id);
    }

    hidden_row_.assign(n, -1);
    for (NodeId v = 0; v < n; ++v) {
        switch (roles_[v]) {
            case Role::input:
                if (!in_edges_[v].empty())
                    throw InvalidGraph("input node " + std::to_string(v) + " has incoming edges");
                inputs_.push_back(v);
                break;
            case Role::output:
                if (!out_edges_[v].empty())
                    throw InvalidGraph("output node " + std::to_string(v) + " has outgoing edges");
                outputs_.push_back(v);
                break;
            case Role::hidden:
                if (in_edges_[v].empty() || out_edges_[v].empty())
                    throw InvalidGraph("hidden node " + std::to_string(v) +
                                       " needs incoming and outgoing edges");
                hidden_row_[v] = static_cast<int>(hidden_.size());
                hidden_.push_back(v);
                break;
        }
    }
    if (inputs_.empty()) throw InvalidGraph("graph has no input nodes");
    if (outputs_.empty()) throw InvalidGraph("graph has no output nodes");

    topo_ = dagnet::topological_order(roles_, edges_);  // throws on cycles
}

ReducedIncidence reduced_incidence(const Dag& dag) {
    ReducedIncidence out;
    out.hidden_nodes = dag.hidden();
    out.mat = Matrix(out.hidden_nodes.size(), dag.num_edges());
    for (const Edge& e : dag.edges()) {
        if (int r = dag.hidden_row(e.dst); r >= 0) out.mat(r, e.id) = 1.0;
        if (int r = dag.hidden_row(e.src); r >= 0) out.mat(r, e.id) = -1.0;
    }
    return out;
}

Bottlenecks bottlenecks(const Dag& dag) {
    Bottlenecks b;
    for (NodeId v : dag.hidden()) {
        if (dag.in_degree(v) == 1) b.in_bottlenecks.push_back(v);
        if (dag.out_degree(v) == 1) b.out_bottlenecks.push_back(v);
    }
    return b;
}

namespace {

// Nodes that reach some target role while never stepping on `banned`,
// walking edges backwards (toward sources) or forwards.
std::vector<bool> reaches_role(const Dag& dag, Role target, NodeId banned, bool walk_backward) {
    std::vector<bool> ok(dag.num_nodes(), false);
    std::queue<NodeId> q;
    for (NodeId v = 0; v < dag.num_nodes(); ++v) {
        if (dag.role(v) == target && v != banned) {
            ok[v] = true;
            q.push(v);
        }
    }
    while (!q.empty()) {
        const NodeId v = q.front();
        q.pop();
        const auto& next = walk_backward ? dag.in_edges(v) : dag.out_edges(v);
        for (EdgeId e : next) {
            const NodeId w = walk_backward ? dag.edge(e).src : dag.edge(e).dst;
            if (w == banned || ok[w]) continue;
            ok[w] = true;
            q.push(w);
        }
    }
    return ok;
}

}  // namespace

std::vector<NodeId> pure_ancestors(const Dag& dag, NodeId v, bool force) {
    if (!dag.is_hidden(v)) throw NotABottleneck("node " + std::to_string(v) + " is not hidden");
    if (!force && dag.out_degree(v) != 1)
        throw NotABottleneck("node " + std::to_string(v) + " is not an out-bottleneck");
    // w is pure iff it cannot reach any output once v is removed.
    const std::vector<bool> escapes = reaches_role(dag, Role::output, v, /*walk_backward=*/true);
    std::vector<NodeId> pure;
    for (NodeId w : dag.hidden())
        if (w == v || !escapes[w]) pure.push_back(w);
    return pure;
}

std::vector<NodeId> pure_descendants(const Dag& dag, NodeId v, bool force) {
    if (!dag.is_hidden(v)) throw NotABottleneck("node " + std::to_string(v) + " is not hidden");
    if (!force && dag.in_degree(v) != 1)
        throw NotABottleneck("node " + std::to_string(v) + " is not an in-bottleneck");
    const std::vector<bool> escapes = reaches_role(dag, Role::input, v, /*walk_backward=*/false);
    std::vector<NodeId> pure;
    for (NodeId w : dag.hidden())
        if (w == v || !escapes[w]) pure.push_back(w);
    return pure;
}

namespace {

// Shared enumeration core: closure over neighbours() for all members but v.
std::vector<std::vector<NodeId>> enumerate_stable_sets(const Dag& dag, NodeId v,
                                                       const std::vector<NodeId>& pure,
                                                       bool forward, int cap) {
    const int k = static_cast<int>(pure.size());
    if (k > cap)
        throw TooLarge("pure set of node " + std::to_string(v) + " has " + std::to_string(k) +
                       " members, cap is " + std::to_string(cap));

    std::vector<int> pos(dag.num_nodes(), -1);
    for (int i = 0; i < k; ++i) pos[pure[i]] = i;

    // Per member, the bitmask of neighbours that must also be inside.
    std::vector<std::uint32_t> need(k, 0);
    std::vector<bool> closes(k, true);
    for (int i = 0; i < k; ++i) {
        if (pure[i] == v) continue;  // the bottleneck's own edge may leave
        const auto& nbr_edges = forward ? dag.out_edges(pure[i]) : dag.in_edges(pure[i]);
        for (EdgeId e : nbr_edges) {
            const NodeId w = forward ? dag.edge(e).dst : dag.edge(e).src;
            if (dag.role(w) != Role::hidden) {
                closes[i] = false;  // neighbour outside any candidate set
            } else if (pos[w] < 0) {
                closes[i] = false;
            } else {
                need[i] |= 1u << pos[w];
            }
        }
    }

    std::vector<std::vector<NodeId>> result;
    const std::uint32_t total = 1u << k;
    for (std::uint32_t mask = 1; mask < total; ++mask) {
        bool ok = true;
        for (int i = 0; i < k && ok; ++i) {
            if (!(mask & (1u << i)) || pure[i] == v) continue;
            if (!closes[i] || (need[i] & ~mask) != 0) ok = false;
        }
        if (!ok) continue;
        std::vector<NodeId> set;
        for (int i = 0; i < k; ++i)
            if (mask & (1u << i)) set.push_back(pure[i]);
        result.push_back(std::move(set));
    }
    std::stable_sort(result.begin(), result.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    return result;
}

}  // namespace

std::vector<std::vector<NodeId>> enumerate_forward_stable_sets(const Dag& dag, NodeId v, int cap) {
    return enumerate_stable_sets(dag, v, pure_ancestors(dag, v), /*forward=*/true, cap);
}

std::vector<std::vector<NodeId>> enumerate_backward_stable_sets(const Dag& dag, NodeId v, int cap) {
    return enumerate_stable_sets(dag, v, pure_descendants(dag, v), /*forward=*/false, cap);
}

namespace {

class UnionFind {
public:
    explicit UnionFind(int n) : parent_(n), size_(n, 1), count_(n) {
        for (int i = 0; i < n; ++i) parent_[i] = i;
    }
    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void merge(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        --count_;
    }
    int count() const { return count_; }

private:
    std::vector<int> parent_, size_;
    int count_;
};

// Quotient node index: 0 is the merged boundary super node, hidden node v
// maps to 1 + hidden_row(v).
UnionFind quotient_union(const Dag& dag, const std::vector<std::uint8_t>& zero_edge_mask) {
    UnionFind uf(1 + static_cast<int>(dag.hidden().size()));
    auto index = [&](NodeId v) {
        const int r = dag.hidden_row(v);
        return r < 0 ? 0 : 1 + r;
    };
    for (const Edge& e : dag.edges()) {
        if (zero_edge_mask[e.id]) continue;
        uf.merge(index(e.src), index(e.dst));
    }
    return uf;
}

}  // namespace

int quotient_components(const Dag& dag, const std::vector<std::uint8_t>& zero_edge_mask) {
    return quotient_union(dag, zero_edge_mask).count();
}

int quotient_components(const Dag& dag, const std::vector<EdgeId>& zero_edges) {
    std::vector<std::uint8_t> mask(dag.num_edges(), 0);
    for (EdgeId e : zero_edges) mask.at(e) = 1;
    return quotient_components(dag, mask);
}

std::vector<std::vector<NodeId>> quotient_cut_sets(const Dag& dag,
                                                   const std::vector<std::uint8_t>& zero_edge_mask) {
    UnionFind uf = quotient_union(dag, zero_edge_mask);
    const int super = uf.find(0);
    std::vector<std::pair<int, NodeId>> grouped;  // (component root, hidden node)
    for (NodeId v : dag.hidden()) {
        const int root = uf.find(1 + dag.hidden_row(v));
        if (root != super) grouped.emplace_back(root, v);
    }
    std::stable_sort(grouped.begin(), grouped.end());
    std::vector<std::vector<NodeId>> sets;
    for (std::size_t i = 0; i < grouped.size();) {
        std::size_t j = i;
        std::vector<NodeId> set;
        while (j < grouped.size() && grouped[j].first == grouped[i].first)
            set.push_back(grouped[j++].second);
        std::sort(set.begin(), set.end());
        sets.push_back(std::move(set));
        i = j;
    }
    std::sort(sets.begin(), sets.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return sets;
}

}  // namespace dagnet
