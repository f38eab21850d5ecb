#include "dagnet/singularity.hpp"

#include <algorithm>
#include <cmath>

#include "dagnet/errors.hpp"

namespace dagnet {

Matrix jacobian(const ReducedIncidence& bt, const Parameters& theta) {
    if (theta.size() != bt.mat.cols()) throw InvalidArgument("parameter count mismatch");
    Matrix j(bt.mat.rows(), bt.mat.cols());
    for (std::size_t r = 0; r < j.rows(); ++r)
        for (std::size_t e = 0; e < j.cols(); ++e) j(r, e) = 2.0 * bt.mat(r, e) * theta[e];
    return j;
}

namespace {

std::vector<std::uint8_t> zero_edge_mask(const Dag& dag, const Parameters& theta,
                                         double tau_zero) {
    if (theta.size() != static_cast<std::size_t>(dag.num_edges()))
        throw InvalidArgument("parameter count mismatch");
    if (tau_zero < 0.0) throw InvalidArgument("tau_zero must be nonnegative");
    std::vector<std::uint8_t> mask(dag.num_edges(), 0);
    for (int e = 0; e < dag.num_edges(); ++e) mask[e] = std::abs(theta[e]) <= tau_zero ? 1 : 0;
    return mask;
}

}  // namespace

int rank_via_topology(const Dag& dag, const Parameters& theta, double tau_zero) {
    const int cc = quotient_components(dag, zero_edge_mask(dag, theta, tau_zero));
    return static_cast<int>(dag.hidden().size()) + 1 - cc;
}

std::vector<std::vector<NodeId>> disconnected_sets(const Dag& dag, const Parameters& theta,
                                                   double tau_zero) {
    return quotient_cut_sets(dag, zero_edge_mask(dag, theta, tau_zero));
}

NuclearNormResult nuclear_norm_and_grad(const ReducedIncidence& bt, const Parameters& theta) {
    NuclearNormResult out{0.0, Parameters(theta.size(), 0.0)};
    if (bt.mat.rows() == 0 || bt.mat.cols() == 0) return out;

    const Matrix j = jacobian(bt, theta);
    const SvdResult svd = jacobi_svd(j);
    for (double s : svd.sigma) out.value += s;
    if (out.value == 0.0) return out;

    const double cutoff = kTauSvFactor * svd.sigma.front();
    std::size_t rank = 0;
    while (rank < svd.sigma.size() && svd.sigma[rank] > cutoff) ++rank;

    // d|J|_*/d theta_e = <U V^T, dJ/d theta_e>; column e of dJ/d theta_e is
    // twice the incidence column, so only the (up to two) hidden endpoints of
    // edge e contribute.
    for (std::size_t e = 0; e < theta.size(); ++e) {
        double g = 0.0;
        for (std::size_t r = 0; r < bt.mat.rows(); ++r) {
            const double b = bt.mat(r, e);
            if (b == 0.0) continue;
            double uv = 0.0;
            for (std::size_t k = 0; k < rank; ++k) uv += svd.u(r, k) * svd.v(e, k);
            g += 2.0 * b * uv;
        }
        out.grad[e] = g;
    }
    return out;
}

SingularityReport singularity_report(const Dag& dag, const Parameters& theta, double tau_zero,
                                     double tau_rank_factor) {
    SingularityReport rep;
    rep.tau_zero = tau_zero;

    const ReducedIncidence bt = reduced_incidence(dag);
    rep.singular_values = singular_values(jacobian(bt, theta));
    const double sigma_max = rep.singular_values.empty() ? 0.0 : rep.singular_values.front();
    rep.tau_rank = tau_rank_factor * sigma_max;
    rep.rank_numerical = static_cast<int>(std::count_if(
        rep.singular_values.begin(), rep.singular_values.end(),
        [&](double s) { return s > rep.tau_rank; }));

    rep.rank_topological = rank_via_topology(dag, theta, tau_zero);
    rep.disconnected = disconnected_sets(dag, theta, tau_zero);
    for (int e = 0; e < dag.num_edges(); ++e)
        if (std::abs(theta[e]) <= tau_zero) rep.zero_edges.push_back(e);
    return rep;
}

}  // namespace dagnet
