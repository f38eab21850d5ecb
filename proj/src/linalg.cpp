#include "dagnet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dagnet/errors.hpp"

namespace dagnet {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix Matrix::multiply(const Matrix& rhs) const {
    Matrix out(rows_, rhs.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = 0; k < cols_; ++k) {
            const double aik = (*this)(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += aik * rhs(k, j);
        }
    return out;
}

double Matrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

namespace {

// Orthogonalizes the columns of b in place, accumulating rotations in v.
// Plain cyclic sweeps; convergence when every column pair is numerically
// orthogonal relative to its norms.
void one_sided_jacobi(Matrix& b, Matrix& v) {
    const std::size_t m = b.rows();
    const std::size_t n = b.cols();
    constexpr double kTol = 1e-15;
    constexpr int kMaxSweeps = 64;

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double bp = b(i, p), bq = b(i, q);
                    app += bp * bp;
                    aqq += bq * bq;
                    apq += bp * bq;
                }
                if (std::abs(apq) <= kTol * std::sqrt(app * aqq) || apq == 0.0) continue;
                rotated = true;

                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;

                for (std::size_t i = 0; i < m; ++i) {
                    const double bp = b(i, p), bq = b(i, q);
                    b(i, p) = c * bp - s * bq;
                    b(i, q) = s * bp + c * bq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }
}

}  // namespace

SvdResult jacobi_svd(const Matrix& a) {
    if (std::min(a.rows(), a.cols()) > 512)
        throw TooLarge("svd supports matrices up to min-dimension 512");
    const bool transpose = a.rows() < a.cols();
    Matrix b = transpose ? a.transposed() : a;  // tall or square
    const std::size_t m = b.rows();
    const std::size_t n = b.cols();

    Matrix v = Matrix::identity(n);
    if (n > 0 && m > 0) one_sided_jacobi(b, v);

    std::vector<double> sigma(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += b(i, j) * b(i, j);
        sigma[j] = std::sqrt(s);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

    Matrix u_sorted(m, n);
    Matrix v_sorted(n, n);
    std::vector<double> sigma_sorted(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        sigma_sorted[j] = sigma[src];
        const double inv = sigma[src] > 0.0 ? 1.0 / sigma[src] : 0.0;
        for (std::size_t i = 0; i < m; ++i) u_sorted(i, j) = b(i, src) * inv;
        for (std::size_t i = 0; i < n; ++i) v_sorted(i, j) = v(i, src);
    }

    SvdResult out;
    out.sigma = std::move(sigma_sorted);
    if (transpose) {
        out.u = std::move(v_sorted);
        out.v = std::move(u_sorted);
    } else {
        out.u = std::move(u_sorted);
        out.v = std::move(v_sorted);
    }
    return out;
}

std::vector<double> singular_values(const Matrix& a) {
    if (a.rows() == 0 || a.cols() == 0) return {};
    return jacobi_svd(a).sigma;
}

}  // namespace dagnet
