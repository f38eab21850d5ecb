#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dagnet/dag.hpp"
#include "dagnet/invariant.hpp"
#include "dagnet/net.hpp"

namespace dagnet {

enum class Regularizer { none, l1, l2, nuclear };
std::string to_string(Regularizer r);
Regularizer regularizer_from_string(const std::string& s);

struct InitScheme {
    enum class Kind { uniform, normal, explicit_values };
    Kind kind = Kind::uniform;
    double a = -1.0, b = 1.0;  // uniform bounds
    double s = 1.0;            // normal stddev
    Parameters values;         // explicit

    static InitScheme uniform(double a, double b) { return {Kind::uniform, a, b, 1.0, {}}; }
    static InitScheme normal(double s) { return {Kind::normal, 0, 0, s, {}}; }
    static InitScheme explicit_theta(Parameters v);
};

// Reference regularizer strengths, tuned for the tabular-scale replication;
// retune per dataset.
inline constexpr double kReferenceAlphaNuclear = 0.05;
inline constexpr double kReferenceAlphaL1 = 10.0;
inline constexpr double kReferenceAlphaL2 = 20.0;

double reference_alpha(Regularizer r);

struct TrainConfig {
    double lr = 1e-3;
    int steps = 1000;
    LossKind loss = LossKind::mse;
    Regularizer reg = Regularizer::none;
    double alpha = 0.0;
    std::uint64_t seed = 0;
    InitScheme init;
    int log_every = 10;
    Activation act = Activation::relu();
    // 0 = full batch (the default; conservation drift analysis assumes it).
    // Otherwise consecutive sample windows cycle deterministically.
    int batch_size = 0;
};

inline constexpr double kNullSigmaThreshold = 1e-3;

struct Snapshot {
    int step;
    double task_loss;
    double reg_value;
    double drift;                     // max |c(t) - c(0)|
    std::vector<double> c;            // per hidden row
    std::vector<double> sigma;        // descending
    int null_sigma_count;             // sigma <= kNullSigmaThreshold
    std::vector<double> score_s;      // product prune score per hidden row
    std::vector<double> score_smax;   // max prune score per hidden row
};

struct TrainRecord {
    std::vector<NodeId> hidden_nodes;
    BalanceVector c0;  // captured before the first update
    std::vector<Snapshot> snapshots;
};

struct TrainResult {
    Parameters theta;
    TrainRecord record;
};

/// Full-batch Euler descent on task loss plus alpha times the regularizer.
/// Snapshots at step 0 (pre-update), every log_every completed steps, and the
/// final step. Single-threaded and bit-reproducible for a fixed config.
/// Throws DivergenceDetected when the loss leaves the finite range.
TrainResult train(const Dag& dag, const Dataset& data, const TrainConfig& cfg);

// Deterministic initializer draw (shared by train and the CLI).
Parameters init_parameters(const Dag& dag, const InitScheme& init, std::uint64_t seed);

struct PruneScores {
    std::vector<NodeId> hidden_nodes;
    std::vector<double> s;      // (sum in-theta^2) * (sum out-theta^2)
    std::vector<double> s_max;  // max of the two sums
};

/// Neuron liveness scores; invariant under the per-neuron rescaling symmetry.
PruneScores prune_scores(const Dag& dag, const Parameters& theta);

enum class PruneOrder { s, s_max };
std::string to_string(PruneOrder o);
PruneOrder prune_order_from_string(const std::string& s);

struct PruneOutcome {
    Dag dag;
    Parameters theta;
    std::vector<NodeId> removed;           // requested removals, original ids
    std::vector<NodeId> removed_stranded;  // cascaded removals of degree-0 strays
    std::vector<NodeId> node_map;          // new node id -> original node id
    std::vector<EdgeId> edge_map;          // new edge id -> original edge id
};

/// Removes a specific hidden-node set with all incident edges, then keeps
/// removing hidden nodes left with no inputs or no outputs. Surviving nodes
/// and edges are renumbered densely in their original order.
PruneOutcome prune_nodes(const Dag& dag, const Parameters& theta,
                         const std::vector<NodeId>& victims);

/// Removes the k hidden nodes with the smallest score (ties by node id).
PruneOutcome prune_neurons(const Dag& dag, const Parameters& theta, PruneOrder order, int k);

/// Test loss after cumulatively pruning k = 0..hidden-count neurons.
std::vector<std::pair<int, double>> prune_curve(const Dag& dag, const Activation& act,
                                                const Parameters& theta, const Dataset& data,
                                                LossKind kind, PruneOrder order);

inline constexpr int kNullModelExactCap = 22;

struct NullModelMode {
    enum class Kind { exact, monte_carlo };
    Kind kind = Kind::exact;
    long samples = 100000;
    std::uint64_t seed = 0;

    static NullModelMode exact() { return {Kind::exact, 0, 0}; }
    static NullModelMode monte_carlo(long n, std::uint64_t seed);
};

/// Tail distribution (k, P(at least k hidden neurons disconnected)) when each
/// edge independently survives with probability 1-p; exact mode sums all edge
/// subsets with binomial weights (edge count capped at kNullModelExactCap).
std::vector<std::pair<int, double>> null_model(const Dag& dag, double p, const NullModelMode& mode);

/// Fraction of edges with |theta_e| <= tau.
double estimate_edge_drop_rate(const Parameters& theta, double tau = 1e-3);

}  // namespace dagnet
