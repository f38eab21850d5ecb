#pragma once

// Shared builders and independent oracles for the test suites. Everything
// here must stay independent of the library code paths it is used to check:
// oracles work from first definitions (path enumeration, power-set scans,
// finite differences, a separate eigensolver).

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <vector>

#include "dagnet/dag.hpp"
#include "dagnet/linalg.hpp"
#include "dagnet/net.hpp"

namespace testutil {

using namespace dagnet;

// ---- graph builders --------------------------------------------------------

// input -> h1 -> h2 -> ... -> output
inline Dag chain_dag(int hidden_count) {
    std::vector<Role> roles;
    roles.push_back(Role::input);
    for (int i = 0; i < hidden_count; ++i) roles.push_back(Role::hidden);
    roles.push_back(Role::output);
    std::vector<Edge> edges;
    for (int i = 0; i + 1 < static_cast<int>(roles.size()); ++i)
        edges.push_back({static_cast<EdgeId>(edges.size()), i, i + 1});
    return Dag(std::move(roles), std::move(edges));
}

// Fully connected MLP; layers.front() inputs, layers.back() outputs.
inline Dag mlp_dag(const std::vector<int>& layers) {
    std::vector<Role> roles;
    std::vector<std::vector<NodeId>> layer_nodes;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        std::vector<NodeId> nodes;
        for (int i = 0; i < layers[l]; ++i) {
            nodes.push_back(static_cast<NodeId>(roles.size()));
            roles.push_back(l == 0 ? Role::input
                                   : (l + 1 == layers.size() ? Role::output : Role::hidden));
        }
        layer_nodes.push_back(std::move(nodes));
    }
    std::vector<Edge> edges;
    for (std::size_t l = 0; l + 1 < layer_nodes.size(); ++l)
        for (NodeId a : layer_nodes[l])
            for (NodeId b : layer_nodes[l + 1])
                edges.push_back({static_cast<EdgeId>(edges.size()), a, b});
    return Dag(std::move(roles), std::move(edges));
}

// Toy net with an out-bottleneck at node 4 feeding output 5. Node roles:
// 0,1 inputs; 2,3,4 hidden; 5 output. The distinguished weight sits on
// edge 0 (input 0 -> node 2).
inline Dag obstruction_toy_dag() {
    std::vector<Role> roles{Role::input, Role::input, Role::hidden,
                            Role::hidden, Role::hidden, Role::output};
    std::vector<Edge> edges{{0, 0, 2}, {1, 1, 2}, {2, 1, 3}, {3, 2, 3},
                            {4, 2, 4}, {5, 3, 4}, {6, 4, 5}};
    return Dag(std::move(roles), std::move(edges));
}

// Initialization matching the toy net's balance (theta_e^2 - 6, 1, 3).
inline Parameters obstruction_toy_theta(double theta_e) {
    return {theta_e, 1.0, 1.0, 2.0, std::sqrt(3.0), 2.0, 2.0};
}

// ---- deterministic RNG ------------------------------------------------------

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double a, double b) {
    return a + (b - a) * uniform01(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {  // inclusive
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

// Random valid graph: 1-3 inputs, 1-max_hidden hidden, 1-2 outputs, random
// forward edges, then degree repairs so every hidden node has a way in and out.
inline Dag random_dag(std::mt19937_64& rng, int max_hidden = 6, double edge_prob = 0.35) {
    const int n_in = uniform_int(rng, 1, 3);
    const int n_hid = uniform_int(rng, 1, max_hidden);
    const int n_out = uniform_int(rng, 1, 2);
    const int n = n_in + n_hid + n_out;

    std::vector<Role> roles(n);
    for (int v = 0; v < n; ++v)
        roles[v] = v < n_in ? Role::input : (v < n_in + n_hid ? Role::hidden : Role::output);

    std::set<std::pair<NodeId, NodeId>> pairs;
    auto allowed = [&](NodeId a, NodeId b) {
        return a < b && roles[a] != Role::output && roles[b] != Role::input;
    };
    for (NodeId a = 0; a < n; ++a)
        for (NodeId b = a + 1; b < n; ++b)
            if (allowed(a, b) && uniform01(rng) < edge_prob) pairs.insert({a, b});

    for (NodeId v = n_in; v < n_in + n_hid; ++v) {
        bool has_in = false, has_out = false;
        for (const auto& [a, b] : pairs) {
            has_in = has_in || b == v;
            has_out = has_out || a == v;
        }
        if (!has_in) pairs.insert({uniform_int(rng, 0, v - 1), v});
        if (!has_out) pairs.insert({v, uniform_int(rng, v + 1, n - 1)});
    }

    std::vector<Edge> edges;
    for (const auto& [a, b] : pairs)
        edges.push_back({static_cast<EdgeId>(edges.size()), a, b});
    return Dag(std::move(roles), std::move(edges));
}

inline Parameters random_theta(std::mt19937_64& rng, const Dag& dag, double lo = -2.0,
                               double hi = 2.0) {
    Parameters theta(dag.num_edges());
    for (double& t : theta) t = uniform(rng, lo, hi);
    return theta;
}

// ---- path-enumeration oracles ----------------------------------------------

inline void collect_paths(const Dag& dag, NodeId v, Role target, std::vector<NodeId>& cur,
                          std::vector<std::vector<NodeId>>& out) {
    if (dag.role(v) == target) {
        out.push_back(cur);
        return;
    }
    for (EdgeId e : dag.out_edges(v)) {
        const NodeId w = dag.edge(e).dst;
        cur.push_back(w);
        collect_paths(dag, w, target, cur, out);
        cur.pop_back();
    }
}

inline std::vector<std::vector<NodeId>> output_paths(const Dag& dag, NodeId start) {
    std::vector<std::vector<NodeId>> out;
    std::vector<NodeId> cur{start};
    collect_paths(dag, start, Role::output, cur, out);
    return out;
}

// Pure ancestors straight from the definition: hidden w (v itself included)
// that reaches v and whose every output path contains v.
inline std::vector<NodeId> pure_ancestors_oracle(const Dag& dag, NodeId v) {
    std::vector<NodeId> pure;
    for (NodeId w : dag.hidden()) {
        if (w == v) {
            pure.push_back(w);
            continue;
        }
        const auto paths = output_paths(dag, w);
        bool reaches_v = false;
        bool all_through_v = true;
        for (const auto& p : paths) {
            const bool has_v = std::find(p.begin(), p.end(), v) != p.end();
            reaches_v = reaches_v || has_v;
            all_through_v = all_through_v && has_v;
        }
        if (reaches_v && all_through_v && !paths.empty()) pure.push_back(w);
    }
    return pure;
}

// Literal closure re-check for a candidate stable set.
inline bool closure_holds(const Dag& dag, NodeId v, const std::vector<NodeId>& set, bool forward) {
    std::set<NodeId> members(set.begin(), set.end());
    for (NodeId u : set) {
        if (u == v) continue;
        const auto& edges = forward ? dag.out_edges(u) : dag.in_edges(u);
        for (EdgeId e : edges) {
            const NodeId nb = forward ? dag.edge(e).dst : dag.edge(e).src;
            if (!members.count(nb)) return false;
        }
    }
    return !set.empty();
}

// ---- finite differences ------------------------------------------------------

inline std::vector<double> central_difference(const std::function<double(const Parameters&)>& f,
                                              const Parameters& theta, double eps = 1e-5) {
    std::vector<double> grad(theta.size());
    Parameters probe = theta;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        probe[i] = theta[i] + eps;
        const double hi = f(probe);
        probe[i] = theta[i] - eps;
        const double lo = f(probe);
        probe[i] = theta[i];
        grad[i] = (hi - lo) / (2.0 * eps);
    }
    return grad;
}

// ---- independent eigensolver (SVD oracle) ------------------------------------

// Cyclic Jacobi on a symmetric matrix; returns eigenvalues descending.
inline std::vector<double> symmetric_eigenvalues(Matrix s) {
    const std::size_t n = s.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += s(i, j) * s(i, j);
        if (off < 1e-26) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (s(p, q) == 0.0) continue;
                const double phi = 0.5 * std::atan2(2.0 * s(p, q), s(q, q) - s(p, p));
                const double c = std::cos(phi), t = std::sin(phi);
                for (std::size_t k = 0; k < n; ++k) {
                    const double a = s(p, k), b = s(q, k);
                    s(p, k) = c * a - t * b;
                    s(q, k) = t * a + c * b;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double a = s(k, p), b = s(k, q);
                    s(k, p) = c * a - t * b;
                    s(k, q) = t * a + c * b;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = s(i, i);
    std::sort(ev.rbegin(), ev.rend());
    return ev;
}

// Singular values via the eigenvalues of the smaller Gram matrix.
inline std::vector<double> singular_values_oracle(const Matrix& a) {
    const Matrix at = a.transposed();
    const Matrix gram = a.rows() <= a.cols() ? a.multiply(at) : at.multiply(a);
    std::vector<double> ev = symmetric_eigenvalues(gram);
    for (double& v : ev) v = std::sqrt(std::max(v, 0.0));
    return ev;
}

// ---- synthetic datasets -------------------------------------------------------

// y = x1 + x2, x uniform in [0,1]^2
inline Dataset sum_dataset(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Dataset d{Matrix(n, 2), Matrix(n, 1)};
    for (int i = 0; i < n; ++i) {
        d.inputs(i, 0) = uniform01(rng);
        d.inputs(i, 1) = uniform01(rng);
        d.targets(i, 0) = d.inputs(i, 0) + d.inputs(i, 1);
    }
    return d;
}

// y = -(x1 + x2), x uniform in [0.1, 1.1]^2 (strictly positive inputs)
inline Dataset neg_sum_dataset(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Dataset d{Matrix(n, 2), Matrix(n, 1)};
    for (int i = 0; i < n; ++i) {
        d.inputs(i, 0) = uniform(rng, 0.1, 1.1);
        d.inputs(i, 1) = uniform(rng, 0.1, 1.1);
        d.targets(i, 0) = -(d.inputs(i, 0) + d.inputs(i, 1));
    }
    return d;
}

// Binary label 1 iff x2 > x1 (ray-separable, learnable without bias).
inline Dataset diag_dataset(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Dataset d{Matrix(n, 2), Matrix(n, 1)};
    for (int i = 0; i < n; ++i) {
        d.inputs(i, 0) = uniform01(rng);
        d.inputs(i, 1) = uniform01(rng);
        d.targets(i, 0) = d.inputs(i, 1) > d.inputs(i, 0) ? 1.0 : 0.0;
    }
    return d;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace testutil
