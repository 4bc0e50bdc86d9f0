#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "plss/csr.hpp"

namespace plss {

/// Row-major dense matrix for sketched Gram systems and test oracles.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t nrows, std::size_t ncols, double fill = 0.0)
        : nrows_(nrows), ncols_(ncols), values_(nrows * ncols, fill) {}

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static DenseMatrix from_csr(const SparseMatrixCSR& a) {
        DenseMatrix m(a.nrows(), a.ncols());
        for (std::size_t i = 0; i < a.nrows(); ++i) {
            const auto cols = a.row_cols(i);
            const auto vals = a.row_vals(i);
            for (std::size_t k = 0; k < cols.size(); ++k) m(i, cols[k]) = vals[k];
        }
        return m;
    }

    std::size_t nrows() const { return nrows_; }
    std::size_t ncols() const { return ncols_; }
    const std::vector<double>& values() const { return values_; }

    double& operator()(std::size_t i, std::size_t j) { return values_[i * ncols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * ncols_ + j]; }

    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * ncols_, ncols_};
    }

    std::vector<double> column(std::size_t j) const {
        std::vector<double> c(nrows_);
        for (std::size_t i = 0; i < nrows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    std::vector<double> multiply(std::span<const double> x) const {
        std::vector<double> y(nrows_, 0.0);
        for (std::size_t i = 0; i < nrows_; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < ncols_; ++j) sum += (*this)(i, j) * x[j];
            y[i] = sum;
        }
        return y;
    }

    std::vector<double> multiply_transpose(std::span<const double> r) const {
        std::vector<double> y(ncols_, 0.0);
        for (std::size_t i = 0; i < nrows_; ++i)
            for (std::size_t j = 0; j < ncols_; ++j) y[j] += (*this)(i, j) * r[i];
        return y;
    }

    DenseMatrix transposed() const {
        DenseMatrix t(ncols_, nrows_);
        for (std::size_t i = 0; i < nrows_; ++i)
            for (std::size_t j = 0; j < ncols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    /// Max absolute row sum.
    double norm_inf() const {
        double best = 0.0;
        for (std::size_t i = 0; i < nrows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < ncols_; ++j) s += std::abs((*this)(i, j));
            best = std::max(best, s);
        }
        return best;
    }

private:
    std::size_t nrows_ = 0;
    std::size_t ncols_ = 0;
    std::vector<double> values_;
};

/// Thrown when elimination meets a pivot below the working-precision
/// threshold. Callers solving sketched Gram systems may catch this and
/// resample the sketch.
class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Solve M X = RHS by row-pivoted Gaussian elimination. A pivot of magnitude
/// at most eps_mach * ||M||_inf raises SingularMatrixError.
inline DenseMatrix dense_solve(const DenseMatrix& m, const DenseMatrix& rhs) {
    if (m.nrows() != m.ncols()) throw std::invalid_argument("dense_solve: matrix not square");
    if (rhs.nrows() != m.nrows())
        throw std::invalid_argument("dense_solve: right-hand side dimension mismatch");
    const std::size_t n = m.nrows();
    const std::size_t nrhs = rhs.ncols();
    const double threshold = std::numeric_limits<double>::epsilon() * m.norm_inf();

    DenseMatrix a = m;
    DenseMatrix x = rhs;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t i = col + 1; i < n; ++i)
            if (std::abs(a(i, col)) > std::abs(a(piv, col))) piv = i;
        if (std::abs(a(piv, col)) <= threshold)
            throw SingularMatrixError("singular to working precision");
        if (piv != col) {
            for (std::size_t j = col; j < n; ++j) std::swap(a(col, j), a(piv, j));
            for (std::size_t j = 0; j < nrhs; ++j) std::swap(x(col, j), x(piv, j));
        }
        for (std::size_t i = col + 1; i < n; ++i) {
            const double factor = a(i, col) / a(col, col);
            if (factor == 0.0) continue;
            a(i, col) = 0.0;
            for (std::size_t j = col + 1; j < n; ++j) a(i, j) -= factor * a(col, j);
            for (std::size_t j = 0; j < nrhs; ++j) x(i, j) -= factor * x(col, j);
        }
    }
    for (std::size_t col = n; col-- > 0;) {
        for (std::size_t j = 0; j < nrhs; ++j) {
            double sum = x(col, j);
            for (std::size_t k = col + 1; k < n; ++k) sum -= a(col, k) * x(k, j);
            x(col, j) = sum / a(col, col);
        }
    }
    return x;
}

inline std::vector<double> dense_solve(const DenseMatrix& m, std::span<const double> rhs) {
    DenseMatrix r(rhs.size(), 1);
    for (std::size_t i = 0; i < rhs.size(); ++i) r(i, 0) = rhs[i];
    const DenseMatrix x = dense_solve(m, r);
    std::vector<double> out(m.ncols());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x(i, 0);
    return out;
}

}  // namespace plss
