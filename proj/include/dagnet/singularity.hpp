#pragma once

#include <vector>

#include "dagnet/dag.hpp"
#include "dagnet/invariant.hpp"
#include "dagnet/linalg.hpp"
#include "dagnet/net.hpp"

namespace dagnet {

// Edge-cut threshold (pruning semantics) and numerical-rank factor
// (linear algebra); intentionally distinct knobs.
inline constexpr double kDefaultTauZero = 1e-3;
inline constexpr double kDefaultTauRankFactor = 1e-8;
// Singular values below this fraction of sigma_max are dropped from the
// nuclear-norm subgradient.
inline constexpr double kTauSvFactor = 1e-12;

/// J = 2 Bt diag(theta): the incidence pattern with column e scaled by
/// 2 theta_e.
Matrix jacobian(const ReducedIncidence& bt, const Parameters& theta);

/// Rank of J from topology alone: hidden count + 1 minus the number of
/// quotient-graph components once edges with |theta_e| <= tau_zero are cut.
int rank_via_topology(const Dag& dag, const Parameters& theta, double tau_zero);

/// Hidden-node groups severed from the merged input/output super node by the
/// cut edges; empty exactly at regular points.
std::vector<std::vector<NodeId>> disconnected_sets(const Dag& dag, const Parameters& theta,
                                                   double tau_zero);

struct NuclearNormResult {
    double value;
    Parameters grad;
};

/// Sum of singular values of J and a subgradient: d|J|_*/d theta_e =
/// 2 (Bt^T U V^T)_ee with the thin SVD truncated at kTauSvFactor * sigma_max.
NuclearNormResult nuclear_norm_and_grad(const ReducedIncidence& bt, const Parameters& theta);

struct SingularityReport {
    int rank_topological;
    int rank_numerical;
    std::vector<double> singular_values;  // descending
    std::vector<std::vector<NodeId>> disconnected;
    std::vector<EdgeId> zero_edges;  // |theta_e| <= tau_zero
    double tau_zero;
    double tau_rank;  // absolute threshold actually applied
};

SingularityReport singularity_report(const Dag& dag, const Parameters& theta,
                                     double tau_zero = kDefaultTauZero,
                                     double tau_rank_factor = kDefaultTauRankFactor);

}  // namespace dagnet
