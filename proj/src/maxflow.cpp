#include "dagnet/maxflow.hpp"

#include <algorithm>
#include <limits>
#include <queue>

#include "dagnet/errors.hpp"

namespace dagnet {

Dinic::Dinic(int node_count) : n_(node_count), graph_(node_count) {}

int Dinic::add_arc(int from, int to, double capacity) {
    if (from < 0 || from >= n_ || to < 0 || to >= n_)
        throw InvalidArgument("flow arc endpoint out of range");
    if (capacity < 0.0) throw InvalidArgument("flow arc capacity must be nonnegative");
    const int handle = static_cast<int>(handles_.size());
    graph_[from].push_back({to, capacity, static_cast<int>(graph_[to].size())});
    graph_[to].push_back({from, 0.0, static_cast<int>(graph_[from].size()) - 1});
    handles_.emplace_back(from, static_cast<int>(graph_[from].size()) - 1);
    initial_cap_.push_back(capacity);
    return handle;
}

bool Dinic::bfs_levels(int s, int t) {
    level_.assign(n_, -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
        const int v = q.front();
        q.pop();
        for (const Arc& a : graph_[v]) {
            if (a.cap > kEps && level_[a.to] < 0) {
                level_[a.to] = level_[v] + 1;
                q.push(a.to);
            }
        }
    }
    return level_[t] >= 0;
}

double Dinic::push(int v, int t, double limit) {
    if (v == t) return limit;
    for (int& i = iter_[v]; i < static_cast<int>(graph_[v].size()); ++i) {
        Arc& a = graph_[v][i];
        if (a.cap <= kEps || level_[a.to] != level_[v] + 1) continue;
        const double d = push(a.to, t, std::min(limit, a.cap));
        if (d > 0.0) {
            a.cap -= d;
            graph_[a.to][a.rev].cap += d;
            return d;
        }
    }
    return 0.0;
}

double Dinic::max_flow(int source, int sink) {
    last_source_ = source;
    double total = 0.0;
    while (bfs_levels(source, sink)) {
        iter_.assign(n_, 0);
        while (true) {
            const double d = push(source, sink, std::numeric_limits<double>::infinity());
            if (d <= 0.0) break;
            total += d;
        }
    }
    return total;
}

double Dinic::flow_on(int arc_handle) const {
    const auto [node, slot] = handles_[arc_handle];
    return initial_cap_[arc_handle] - graph_[node][slot].cap;
}

std::vector<bool> Dinic::residual_reachable() const {
    std::vector<bool> seen(n_, false);
    if (last_source_ < 0) return seen;
    std::queue<int> q;
    seen[last_source_] = true;
    q.push(last_source_);
    while (!q.empty()) {
        const int v = q.front();
        q.pop();
        for (const Arc& a : graph_[v]) {
            if (a.cap > kEps && !seen[a.to]) {
                seen[a.to] = true;
                q.push(a.to);
            }
        }
    }
    return seen;
}

}  // namespace dagnet
