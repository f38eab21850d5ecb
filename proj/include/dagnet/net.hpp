#pragma once

#include <span>
#include <string>
#include <vector>

#include "dagnet/dag.hpp"
#include "dagnet/linalg.hpp"

namespace dagnet {

// One real weight per edge, indexed by edge id.
using Parameters = std::vector<double>;

/// Homogeneous activation: value(x) = slope(x) * x everywhere, including 0.
/// slope at 0 is the left branch (0 for relu, gamma for leaky), which keeps
/// gradients on fully-zeroed neurons exactly zero.
struct Activation {
    double gamma = 0.0;  // in [0,1]; 0 is plain relu

    static Activation relu() { return {0.0}; }
    static Activation leaky(double g);

    double value(double x) const { return x > 0.0 ? x : gamma * x; }
    double slope(double x) const { return x > 0.0 ? 1.0 : gamma; }
};

/// Rows are samples; input columns follow ascending input-node id, target
/// columns ascending output-node id.
struct Dataset {
    Matrix inputs;
    Matrix targets;

    int size() const { return static_cast<int>(inputs.rows()); }
};

void validate_dataset(const Dag& dag, const Dataset& data);

enum class LossKind { mse, logistic };

std::string to_string(LossKind k);
LossKind loss_kind_from_string(const std::string& s);

struct ForwardResult {
    std::vector<double> outputs;       // ascending output-node id
    std::vector<double> activations;   // per node id; inputs carry x, outputs their sum
    std::vector<double> preact_hidden; // per hidden row (ascending hidden id)
};

/// Single-sample pass in topological order. Hidden nodes sum incoming
/// edge values theta_e * a_src, apply the activation, and feed each outgoing
/// edge; output nodes accumulate linearly.
ForwardResult forward(const Dag& dag, const Activation& act, const Parameters& theta,
                      std::span<const double> x);

double loss(const Dag& dag, const Activation& act, const Parameters& theta, const Dataset& data,
            LossKind kind);

/// Exact reverse-mode gradient of `loss`, batch-averaged with a fixed
/// per-sample summation order.
Parameters gradient(const Dag& dag, const Activation& act, const Parameters& theta,
                    const Dataset& data, LossKind kind);

struct LossAndGradient {
    double value;
    Parameters grad;
};

LossAndGradient loss_and_gradient(const Dag& dag, const Activation& act, const Parameters& theta,
                                  const Dataset& data, LossKind kind);

// Explicit Euler step theta' = theta - lr * g.
Parameters gf_step(const Parameters& theta, const Parameters& g, double lr);

/// Adds a virtual input node (id = current node count) wired to every hidden
/// node; pair with a constant-1 data column appended on load.
Dag with_bias(const Dag& dag);

}  // namespace dagnet
