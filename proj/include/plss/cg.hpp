#pragma once

#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "plss/operators.hpp"
#include "plss/solve_types.hpp"
#include "plss/solvers.hpp"
#include "plss/vec.hpp"

namespace plss {

/// Hestenes-Stiefel conjugate gradients for spd operators; one matvec per
/// iteration. p^T A p <= 0 reports Breakdown (indefiniteness detected).
inline SolveReport cg_reference(LinearOperator& a, std::span<const double> b,
                                std::span<const double> x0, const SolverConfig& cfg) {
    detail::check_system_dims(a, b, x0);
    if (a.nrows() != a.ncols()) throw std::invalid_argument("cg_reference: operator must be square");
    return detail::timed_run(a, [&] {
        const std::size_t n = a.ncols();
        const auto opt = detail::make_core_options(cfg, norm2(b), n,
                                                   detail::symmetric_default_maxit(n));

        std::vector<double> x(x0.begin(), x0.end());
        std::vector<double> r(n), p(n), ap(n), scratch(n);
        auto refresh_true_residual = [&]() {
            a.apply(x, scratch);
            for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - scratch[i];
            return norm2(r);
        };
        auto true_residual_norm = [&]() {
            a.apply(x, scratch);
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = b[i] - scratch[i];
                sum += d * d;
            }
            return std::sqrt(sum);
        };
        double claim_bar = std::numeric_limits<double>::infinity();

        SolveReport rep;
        detail::SolveTracker tracker(opt.history_denom, opt.collect_iterates,
                                     opt.stagnation_window);
        double rnorm = refresh_true_residual();
        bool r_is_true = true;
        tracker.record(0, rnorm, x);

        SolveStatus status = SolveStatus::MaxIterations;
        std::size_t k = 0;
        bool done = rnorm <= opt.abs_tol;
        if (done) status = SolveStatus::Converged;

        p = r;
        double rz = rnorm * rnorm;
        while (!done) {
            if (k >= opt.maxit || tracker.stagnated(k)) {
                status = k >= opt.maxit ? SolveStatus::MaxIterations : SolveStatus::Stagnation;
                if (!r_is_true) {
                    rnorm = refresh_true_residual();
                    tracker.amend_last(rnorm);
                }
                if (rnorm <= opt.abs_tol) status = SolveStatus::Converged;
                break;
            }
            a.apply(p, ap);
            const double pap = dot(p, ap);
            if (!(pap > 0.0)) {
                status = SolveStatus::Breakdown;
                if (!r_is_true) {
                    rnorm = refresh_true_residual();
                    tracker.amend_last(rnorm);
                }
                break;
            }
            const double alpha = rz / pap;
            axpy(alpha, p, x);
            axpy(-alpha, ap, r);
            rnorm = norm2(r);
            r_is_true = false;
            ++k;
            tracker.record(k, rnorm, x);

            if (rnorm <= opt.abs_tol && rnorm < claim_bar) {
                const double true_norm = true_residual_norm();
                if (true_norm <= opt.abs_tol) {
                    tracker.amend_last(true_norm);
                    status = SolveStatus::Converged;
                    break;
                }
                claim_bar = 0.5 * rnorm;
            }
            const double rz_next = rnorm * rnorm;
            const double beta = rz_next / rz;
            rz = rz_next;
            for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
        }

        rep.status = status;
        rep.iterations = k;
        rep.final_x = std::move(x);
        tracker.fill_report(rep);
        return rep;
    });
}

inline SolveReport cg_reference(const SparseMatrixCSR& a, std::span<const double> b,
                                std::span<const double> x0, const SolverConfig& cfg) {
    LinearOperator op = make_operator(a);
    return cg_reference(op, b, x0, cfg);
}

}  // namespace plss
