#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "plss/csr.hpp"
#include "plss/dense.hpp"
#include "plss/operators.hpp"
#include "plss/sketch.hpp"
#include "plss/solve_types.hpp"
#include "plss/solvers.hpp"
#include "plss/vec.hpp"

namespace plss {

namespace detail {

/// Explicit sketch-and-project update, evaluating
/// p = W A^T S (S^T A W A^T S)^{-1} S^T r with a dense Gram solve each
/// iteration. Sketch columns are normalized before use, which leaves the
/// projection unchanged but keeps the Gram system scaled.
inline SolveReport sketch_project_run(LinearOperator& a, std::span<const double> b,
                                      std::span<const double> x0, const SolverConfig& cfg,
                                      const SketchSpec& spec, const std::vector<double>& w_diag,
                                      SketchState& state) {
    check_system_dims(a, b, x0);
    const std::size_t m = a.nrows();
    const std::size_t n = a.ncols();
    if (!w_diag.empty() && w_diag.size() != n)
        throw std::invalid_argument("sketch_project_explicit: diagonal weight length mismatch");
    if (spec.variant == SketchVariant::RandomNormal && spec.rank < 1)
        throw std::invalid_argument("sketch_project_explicit: sketch rank must be >= 1");
    const bool fresh_sketch = spec.variant == SketchVariant::RandomNormal;
    const std::size_t rank = spec.rank;
    constexpr std::size_t max_resample = 5;

    const auto opt = make_core_options(cfg, norm2(b), n, n);

    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> r(m), v(m);
    auto refresh_true_residual = [&]() {
        a.apply(x, v);
        for (std::size_t i = 0; i < m; ++i) r[i] = b[i] - v[i];
        return norm2(r);
    };
    auto true_residual_norm = [&]() {
        a.apply(x, v);
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double d = b[i] - v[i];
            sum += d * d;
        }
        return std::sqrt(sum);
    };
    double claim_bar = std::numeric_limits<double>::infinity();

    // Working copies with unit-norm sketch columns: sketch_cols holds the
    // normalized s_j, projected_cols the corresponding A^T s_j.
    std::vector<std::vector<double>> sketch_cols;
    std::vector<std::vector<double>> projected_cols;

    auto solve_gram = [&](std::vector<double>& coeff) {
        const std::size_t k_cols = sketch_cols.size();
        DenseMatrix gram(k_cols, k_cols);
        for (std::size_t i = 0; i < k_cols; ++i)
            for (std::size_t j = i; j < k_cols; ++j) {
                double s = 0.0;
                if (w_diag.empty())
                    s = dot(projected_cols[i], projected_cols[j]);
                else
                    for (std::size_t l = 0; l < n; ++l)
                        s += projected_cols[i][l] * w_diag[l] * projected_cols[j][l];
                gram(i, j) = s;
                gram(j, i) = s;
            }
        std::vector<double> rhs(k_cols);
        for (std::size_t j = 0; j < k_cols; ++j) rhs[j] = dot(sketch_cols[j], r);
        coeff = dense_solve(gram, rhs);
    };

    SolveReport rep;
    SolveTracker tracker(opt.history_denom, opt.collect_iterates, opt.stagnation_window);
    double rnorm = refresh_true_residual();
    bool r_is_true = true;
    tracker.record(0, rnorm, x);

    SolveStatus status = SolveStatus::MaxIterations;
    std::size_t k = 0;
    bool done = rnorm <= opt.abs_tol;
    if (done) status = SolveStatus::Converged;

    while (!done && k < opt.maxit) {
        if (tracker.stagnated(k)) {
            status = SolveStatus::Stagnation;
            break;
        }

        std::vector<double> coeff;
        bool have_update = false;
        for (std::size_t attempt = 0; attempt < max_resample && !have_update; ++attempt) {
            if (fresh_sketch) {
                sketch_cols.assign(rank, std::vector<double>(m));
                projected_cols.clear();
                for (auto& col : sketch_cols)
                    for (double& entry : col) entry = state.rng().next_normal();
            } else {
                const SketchColumn added = next_sketch_column(spec, state, r, &a);
                std::vector<double> col(m, 0.0);
                if (added.dense != nullptr)
                    col = *added.dense;
                else
                    col[*added.index] = 1.0;
                const double cnorm = norm2(col);
                if (cnorm == 0.0) {
                    state.pop_last();
                    continue;
                }
                for (double& entry : col) entry /= cnorm;
                sketch_cols.push_back(std::move(col));
            }
            while (projected_cols.size() < sketch_cols.size())
                projected_cols.push_back(a.apply_transpose(sketch_cols[projected_cols.size()]));

            try {
                solve_gram(coeff);
                have_update = true;
            } catch (const SingularMatrixError&) {
                if (fresh_sketch) continue;
                state.pop_last();
                sketch_cols.pop_back();
                projected_cols.pop_back();
            }
        }
        if (!have_update) {
            status = SolveStatus::Breakdown;
            if (!r_is_true) {
                rnorm = refresh_true_residual();
                tracker.amend_last(rnorm);
            }
            break;
        }

        // p = W A^T S c
        std::vector<double> p(n, 0.0);
        for (std::size_t j = 0; j < projected_cols.size(); ++j)
            axpy(coeff[j], projected_cols[j], p);
        if (!w_diag.empty())
            for (std::size_t l = 0; l < n; ++l) p[l] *= w_diag[l];

        axpy(1.0, p, x);
        a.apply(p, v);
        for (std::size_t i = 0; i < m; ++i) r[i] -= v[i];
        rnorm = norm2(r);
        r_is_true = false;
        ++k;
        tracker.record(k, rnorm, x);

        if (rnorm <= opt.abs_tol && rnorm < claim_bar) {
            const double true_norm = true_residual_norm();
            if (true_norm <= opt.abs_tol) {
                tracker.amend_last(true_norm);
                status = SolveStatus::Converged;
                done = true;
            } else {
                claim_bar = 0.5 * rnorm;
            }
        }
        if (!done && k >= opt.maxit) {
            if (!r_is_true) {
                rnorm = refresh_true_residual();
                tracker.amend_last(rnorm);
            }
            if (rnorm <= opt.abs_tol) status = SolveStatus::Converged;
        }
    }

    rep.status = status;
    rep.iterations = k;
    rep.final_x = std::move(x);
    tracker.fill_report(rep);
    return rep;
}

}  // namespace detail

/// Fixed- or growing-sketch solver evaluating the explicit projection
/// formula. RandomNormal draws a fresh m x rank sketch every iteration (the
/// conventional randomized baseline); the other variants expand the sketch
/// by one column per iteration. NormSquared index sampling needs the
/// explicit matrix, so it is only available through the CSR overload.
inline SolveReport sketch_project_explicit(LinearOperator& a, std::span<const double> b,
                                           std::span<const double> x0, const SolverConfig& cfg,
                                           const SketchSpec& spec,
                                           const std::vector<double>& w_diag = {}) {
    if ((spec.variant == SketchVariant::IdentityColumns ||
         spec.variant == SketchVariant::MatrixColumns) &&
        spec.sampling == IndexSampling::NormSquared)
        throw std::invalid_argument(
            "sketch_project_explicit: norm-squared sampling needs the CSR overload");
    SketchSpec seeded = spec;
    seeded.seed = spec.seed != 0 ? spec.seed : cfg.seed;
    const std::size_t range =
        seeded.variant == SketchVariant::MatrixColumns ? a.ncols() : a.nrows();
    SketchState state(seeded, a.nrows(), range);
    return detail::timed_run(
        a, [&] { return detail::sketch_project_run(a, b, x0, cfg, seeded, w_diag, state); });
}

inline SolveReport sketch_project_explicit(const SparseMatrixCSR& a, std::span<const double> b,
                                           std::span<const double> x0, const SolverConfig& cfg,
                                           const SketchSpec& spec,
                                           const std::vector<double>& w_diag = {}) {
    LinearOperator op = make_operator(a);
    SketchSpec seeded = spec;
    seeded.seed = spec.seed != 0 ? spec.seed : cfg.seed;
    std::vector<double> weights;
    if (seeded.sampling == IndexSampling::NormSquared) {
        if (seeded.variant == SketchVariant::IdentityColumns)
            weights = a.row_norms_squared();
        else if (seeded.variant == SketchVariant::MatrixColumns) {
            weights = a.column_norms();
            for (double& w : weights) w *= w;
        }
    }
    const std::size_t range =
        seeded.variant == SketchVariant::MatrixColumns ? a.ncols() : a.nrows();
    SketchState state(seeded, a.nrows(), range, std::move(weights));
    return detail::timed_run(
        op, [&] { return detail::sketch_project_run(op, b, x0, cfg, seeded, w_diag, state); });
}

}  // namespace plss
