#pragma once

#include <cstddef>
#include <vector>

namespace dagnet {

// Dense row-major matrix. Everything in this project is desk scale
// (dozens of rows/columns), so no blocking or expression tricks.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    Matrix transposed() const;
    Matrix multiply(const Matrix& rhs) const;
    double frobenius_norm() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct SvdResult {
    Matrix u;                   // rows() x k, k = min(rows, cols)
    std::vector<double> sigma;  // descending, length k
    Matrix v;                   // cols() x k
};

// One-sided Jacobi SVD. Cyclic column sweeps; never forms A^T A.
// Columns with zero norm get zero singular values and zero U columns;
// callers that need orthonormal bases must restrict to sigma above a cutoff.
SvdResult jacobi_svd(const Matrix& a);

std::vector<double> singular_values(const Matrix& a);

}  // namespace dagnet
