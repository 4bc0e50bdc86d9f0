#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "plss/dense.hpp"
#include "plss/vec.hpp"

namespace plss {

struct OracleResult {
    std::vector<double> solution;
    double residual_norm = 0.0;
    std::optional<double> condition_estimate;
};

namespace oracle_detail {

/// Gaussian elimination with partial pivoting, kept separate from the
/// library's dense_solve so oracle results do not share its code path.
inline std::vector<std::vector<double>> gauss_solve(DenseMatrix a,
                                                    std::vector<std::vector<double>> rhs) {
    const std::size_t n = a.nrows();
    if (a.ncols() != n) throw std::invalid_argument("oracle: matrix not square");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t i = col + 1; i < n; ++i)
            if (std::abs(a(i, col)) > std::abs(a(piv, col))) piv = i;
        if (a(piv, col) == 0.0) throw std::runtime_error("oracle: singular matrix");
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
            for (auto& v : rhs) std::swap(v[col], v[piv]);
        }
        for (std::size_t i = col + 1; i < n; ++i) {
            const double f = a(i, col) / a(col, col);
            if (f == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) a(i, j) -= f * a(col, j);
            for (auto& v : rhs) v[i] -= f * v[col];
        }
    }
    for (auto& v : rhs)
        for (std::size_t col = n; col-- > 0;) {
            for (std::size_t j = col + 1; j < n; ++j) v[col] -= a(col, j) * v[j];
            v[col] /= a(col, col);
        }
    return rhs;
}

inline double residual_norm_of(const DenseMatrix& a, std::span<const double> b,
                               const std::vector<double>& x) {
    std::vector<double> r = a.multiply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    return norm2(r);
}

}  // namespace oracle_detail

/// Ground-truth direct solve used by the solver acceptance tests. The
/// condition estimate is ||A||_inf * ||A^{-1}||_inf from the explicit
/// inverse (test-scale matrices only).
inline OracleResult dense_direct_solve(const DenseMatrix& a, std::span<const double> b) {
    if (a.nrows() != a.ncols()) throw std::invalid_argument("oracle: matrix not square");
    if (b.size() != a.nrows()) throw std::invalid_argument("oracle: rhs length mismatch");
    const std::size_t n = a.nrows();

    std::vector<std::vector<double>> rhs(1 + n);
    rhs[0].assign(b.begin(), b.end());
    for (std::size_t j = 0; j < n; ++j) {
        rhs[1 + j].assign(n, 0.0);
        rhs[1 + j][j] = 1.0;
    }
    auto sols = oracle_detail::gauss_solve(a, std::move(rhs));

    OracleResult out;
    out.solution = std::move(sols[0]);
    out.residual_norm = oracle_detail::residual_norm_of(a, b, out.solution);
    double inv_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) row_sum += std::abs(sols[1 + j][i]);
        inv_norm = std::max(inv_norm, row_sum);
    }
    out.condition_estimate = a.norm_inf() * inv_norm;
    return out;
}

/// Minimum-norm solution of the sketched system S^T A x = S^T b.
inline OracleResult one_shot_sketched_solve(const DenseMatrix& a, std::span<const double> b,
                                            const DenseMatrix& s) {
    if (s.nrows() != a.nrows()) throw std::invalid_argument("oracle: sketch row mismatch");
    const std::size_t n = a.ncols();
    const std::size_t r = s.ncols();

    // M = S^T A (r x n), g = S^T b; min-norm x = M^T (M M^T)^{-1} g.
    DenseMatrix m_mat(r, n);
    std::vector<double> g(r, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
        const auto s_col = s.column(i);
        const auto row = a.multiply_transpose(s_col);
        for (std::size_t j = 0; j < n; ++j) m_mat(i, j) = row[j];
        g[i] = dot(s_col, b);
    }
    DenseMatrix gram(r, r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) gram(i, j) = dot(m_mat.row(i), m_mat.row(j));

    std::vector<std::vector<double>> rhs{g};
    std::vector<double> coeff;
    try {
        coeff = oracle_detail::gauss_solve(gram, std::move(rhs))[0];
    } catch (const std::runtime_error&) {
        throw std::runtime_error("oracle: sketched system is rank-deficient");
    }

    OracleResult out;
    out.solution = m_mat.multiply_transpose(coeff);
    out.residual_norm = oracle_detail::residual_norm_of(a, b, out.solution);
    return out;
}

/// Residual-history sketch-and-project evaluated through the explicit
/// projection formula with a dense Gram solve per step: the reference the
/// short-recurrence solvers are checked against. W is the inverse weight
/// (W = B^{-1}); sketch columns are normalized, which leaves each update
/// unchanged. Returns [x_0, x_1, ...]; a singular Gram system truncates
/// the sequence at the steps completed.
inline std::vector<std::vector<double>> explicit_residual_sketch_oracle(
    const DenseMatrix& a, std::span<const double> b, std::span<const double> x0,
    std::size_t steps, const DenseMatrix& w) {
    const std::size_t m = a.nrows();
    const std::size_t n = a.ncols();
    if (n > 12) throw std::invalid_argument("oracle: dense sketch oracle is limited to n <= 12");
    if (w.nrows() != n || w.ncols() != n)
        throw std::invalid_argument("oracle: weight dimension mismatch");
    if (b.size() != m || x0.size() != n)
        throw std::invalid_argument("oracle: system dimension mismatch");

    std::vector<std::vector<double>> iterates;
    std::vector<double> x(x0.begin(), x0.end());
    iterates.push_back(x);

    std::vector<std::vector<double>> sketch_cols;     // normalized r_0 ... r_{k-1}
    std::vector<std::vector<double>> projected_cols;  // A^T s_j

    for (std::size_t k = 0; k < steps; ++k) {
        std::vector<double> r = a.multiply(x);
        for (std::size_t i = 0; i < m; ++i) r[i] = b[i] - r[i];
        const double rnorm = norm2(r);
        if (rnorm == 0.0) break;
        for (double& entry : r) entry /= rnorm;
        sketch_cols.push_back(r);
        projected_cols.push_back(a.multiply_transpose(r));

        const std::size_t cols = sketch_cols.size();
        DenseMatrix gram(cols, cols);
        for (std::size_t i = 0; i < cols; ++i) {
            const auto wm = w.multiply(projected_cols[i]);
            for (std::size_t j = 0; j < cols; ++j) gram(j, i) = dot(projected_cols[j], wm);
        }
        std::vector<double> g(cols);
        std::vector<double> r_current = a.multiply(x);
        for (std::size_t i = 0; i < m; ++i) r_current[i] = b[i] - r_current[i];
        for (std::size_t j = 0; j < cols; ++j) g[j] = dot(sketch_cols[j], r_current);

        std::vector<double> coeff;
        try {
            coeff = oracle_detail::gauss_solve(gram, {g})[0];
        } catch (const std::runtime_error&) {
            sketch_cols.pop_back();
            projected_cols.pop_back();
            break;  // truncated: Gram singular before convergence
        }

        std::vector<double> at_s_c(n, 0.0);
        for (std::size_t j = 0; j < cols; ++j) axpy(coeff[j], projected_cols[j], at_s_c);
        const std::vector<double> p = w.multiply(at_s_c);
        axpy(1.0, p, x);
        iterates.push_back(x);
    }
    return iterates;
}

}  // namespace plss
