#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "plss/csr.hpp"
#include "plss/operators.hpp"
#include "plss/random.hpp"
#include "plss/sketch.hpp"
#include "plss/solve_types.hpp"
#include "plss/solvers.hpp"
#include "plss/vec.hpp"

namespace plss {

namespace detail {

inline DiscreteSampler make_row_sampler(const std::vector<double>& row_norms_squared,
                                        IndexSampling sampling) {
    if (sampling == IndexSampling::NormSquared) {
        double total = 0.0;
        for (double w : row_norms_squared) total += w;
        if (!(total > 0.0)) throw std::invalid_argument("zero matrix");
        return DiscreteSampler::weighted(row_norms_squared);
    }
    return DiscreteSampler::uniform(row_norms_squared.size());
}

}  // namespace detail

/// Randomized Kaczmarz: project x onto the hyperplane of one sampled row
/// per iteration. Work per iteration is O(nnz(row)); the operator counters
/// move only for the periodic true-residual checks (every
/// cfg.true_residual_check iterations, default n). Between checks the
/// residual history carries the last verified value.
inline SolveReport randomized_kaczmarz(const SparseMatrixCSR& a, std::span<const double> b,
                                       std::span<const double> x0, const SolverConfig& cfg,
                                       IndexSampling sampling = IndexSampling::NormSquared) {
    LinearOperator op = make_operator(a);
    detail::check_system_dims(op, b, x0);
    return detail::timed_run(op, [&] {
        const std::size_t m = a.nrows();
        const std::size_t n = a.ncols();
        auto opt = detail::make_core_options(cfg, norm2(b), n, n);
        const std::size_t check_period =
            cfg.true_residual_check != 0 ? cfg.true_residual_check : std::max<std::size_t>(n, 1);
        // Progress is only measured at checkpoints, arrives in bursts when
        // rarely sampled rows come up, and the residual is not monotone, so
        // the stall window spans many checkpoints and sampling rounds.
        opt.stagnation_window =
            std::max({opt.stagnation_window, 8 * check_period, 32 * m});

        const std::vector<double> row_norms2 = a.row_norms_squared();
        DiscreteSampler sampler = detail::make_row_sampler(row_norms2, sampling);
        CounterRng rng(cfg.seed);

        std::vector<double> x(x0.begin(), x0.end());
        std::vector<double> r(m);
        auto true_residual = [&]() {
            op.apply(x, r);
            for (std::size_t i = 0; i < m; ++i) r[i] = b[i] - r[i];
            return norm2(r);
        };

        SolveReport rep;
        detail::SolveTracker tracker(opt.history_denom, opt.collect_iterates,
                                     opt.stagnation_window);
        double rnorm = true_residual();
        tracker.record(0, rnorm, x);

        SolveStatus status = SolveStatus::MaxIterations;
        std::size_t k = 0;
        bool done = rnorm <= opt.abs_tol;
        if (done) status = SolveStatus::Converged;

        while (!done && k < opt.maxit) {
            std::size_t row = 0;
            bool found = false;
            for (std::size_t attempt = 0; attempt < m; ++attempt) {
                row = sampler.sample(rng);
                if (row_norms2[row] > 0.0) {
                    found = true;
                    break;
                }
            }
            if (!found) {
                status = SolveStatus::Breakdown;
                break;
            }

            const double eta = (b[row] - a.row_dot(row, x)) / row_norms2[row];
            const auto cols = a.row_cols(row);
            const auto vals = a.row_vals(row);
            for (std::size_t j = 0; j < cols.size(); ++j) x[cols[j]] += eta * vals[j];

            ++k;
            tracker.record(k, rnorm, x);  // carries the last verified residual

            const bool checked = (k % check_period == 0) || k == opt.maxit;
            if (checked) {
                rnorm = true_residual();
                tracker.amend_last(rnorm);
                if (rnorm <= opt.abs_tol) {
                    status = SolveStatus::Converged;
                    done = true;
                } else if (tracker.stagnated(k)) {
                    status = SolveStatus::Stagnation;
                    done = true;
                }
            }
        }

        rep.status = status;
        rep.iterations = k;
        rep.final_x = std::move(x);
        tracker.fill_report(rep);
        return rep;
    });
}

/// Generalized (projected) randomized Kaczmarz: the identity-column sketch
/// grows by one row index per iteration. The update direction is the
/// weighted image of the sampled row with every past update projected out
/// through the diagonal Gram matrix G = diag(phi_1, ..., phi_k),
///   d = W a_i^T - P G^{-1} P^T a_i^T,   p = ((r)_i / a_i d) d,
/// which keeps all previously sampled row equations satisfied and reduces
/// to the plain randomized Kaczmarz step on the first iteration. Memory
/// grows by one n-vector per iteration. w_diag holds the diagonal of
/// W = B^{-1} (empty for W = I).
inline SolveReport plss_kaczmarz(const SparseMatrixCSR& a, std::span<const double> b,
                                 std::span<const double> x0, const SolverConfig& cfg,
                                 const std::vector<double>& w_diag = {},
                                 IndexSampling sampling = IndexSampling::NormSquared) {
    LinearOperator op = make_operator(a);
    detail::check_system_dims(op, b, x0);
    if (!w_diag.empty() && w_diag.size() != a.ncols())
        throw std::invalid_argument("plss_kaczmarz: diagonal weight length mismatch");
    return detail::timed_run(op, [&] {
        const std::size_t m = a.nrows();
        const std::size_t n = a.ncols();
        const auto opt = detail::make_core_options(cfg, norm2(b), n, n);

        const std::vector<double> row_norms2 = a.row_norms_squared();
        DiscreteSampler sampler = detail::make_row_sampler(row_norms2, sampling);
        CounterRng rng(cfg.seed);

        std::vector<double> x(x0.begin(), x0.end());
        std::vector<double> r(m), d(n), row_vec(n);
        std::vector<std::vector<double>> past_updates;  // columns of P
        std::vector<double> g_diag;                     // phi_i = p_i^T W^{-1} p_i

        auto true_residual = [&]() {
            op.apply(x, r);
            for (std::size_t i = 0; i < m; ++i) r[i] = b[i] - r[i];
            return norm2(r);
        };
        auto weighted_self_product = [&](const std::vector<double>& p) {
            if (w_diag.empty()) return norm2_squared(p);
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += p[i] * p[i] / w_diag[i];
            return s;
        };

        SolveReport rep;
        detail::SolveTracker tracker(opt.history_denom, opt.collect_iterates,
                                     opt.stagnation_window);
        double rnorm = true_residual();
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

            std::size_t row = 0;
            double denom = 0.0;
            bool found = false;
            std::size_t degenerate_directions = 0;
            // Re-drawing an already satisfied row is routine for sampling
            // with replacement; only degenerate projected directions count
            // toward breakdown.
            for (std::size_t attempt = 0; attempt < 8 * m && !found; ++attempt) {
                if (degenerate_directions >= m) break;
                row = sampler.sample(rng);
                if (row_norms2[row] == 0.0) continue;
                // A row whose residual entry is negligible contributes a
                // near-zero update whose Gram entry would poison G^{-1}.
                if (std::abs(r[row]) <= cfg.breakdown_guard * rnorm) continue;

                // d = W a_i^T - P G^{-1} P^T a_i^T
                std::fill(row_vec.begin(), row_vec.end(), 0.0);
                const auto cols = a.row_cols(row);
                const auto vals = a.row_vals(row);
                for (std::size_t j = 0; j < cols.size(); ++j) row_vec[cols[j]] = vals[j];
                if (w_diag.empty())
                    std::copy(row_vec.begin(), row_vec.end(), d.begin());
                else
                    for (std::size_t i = 0; i < n; ++i) d[i] = w_diag[i] * row_vec[i];
                for (std::size_t j = 0; j < past_updates.size(); ++j)
                    axpy(-dot(past_updates[j], row_vec) / g_diag[j], past_updates[j], d);

                denom = a.row_dot(row, d);
                if (std::abs(denom) <=
                    cfg.breakdown_guard * std::sqrt(row_norms2[row]) * norm2(d)) {
                    ++degenerate_directions;
                    continue;
                }
                found = true;
            }
            if (!found) {
                status = degenerate_directions >= m ? SolveStatus::Breakdown
                                                    : SolveStatus::Stagnation;
                break;
            }

            const double eta = r[row] / denom;
            std::vector<double> p(n);
            scaled_copy(eta, d, p);
            axpy(1.0, p, x);
            g_diag.push_back(weighted_self_product(p));
            past_updates.push_back(std::move(p));

            rnorm = true_residual();
            ++k;
            tracker.record(k, rnorm, x);
            if (rnorm <= opt.abs_tol) {
                status = SolveStatus::Converged;
                done = true;
            }
        }

        rep.status = status;
        rep.iterations = k;
        rep.final_x = std::move(x);
        tracker.fill_report(rep);
        return rep;
    });
}

}  // namespace plss
