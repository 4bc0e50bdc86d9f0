#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "plss/csr.hpp"
#include "plss/operators.hpp"
#include "plss/solve_types.hpp"
#include "plss/vec.hpp"

namespace plss {

namespace detail {

inline double stagnation_improvement_factor() {
    static const double f =
        std::sqrt(std::sqrt(std::numeric_limits<double>::epsilon()));
    return f;
}

/// Resolved per-run options; tolerances are absolute residual norms.
struct CoreOptions {
    double abs_tol = 0.0;
    double history_denom = 1.0;
    std::size_t maxit = 1;
    double breakdown_guard = std::sqrt(std::numeric_limits<double>::epsilon());
    bool restart_on_breakdown = true;
    bool collect_iterates = false;
    std::size_t stagnation_window = 0;  // 0 disables the check
    /// Test hook: called after each iteration with the update p and its
    /// companion vector (u for B = A^{-1}, v for B = A).
    std::function<void(std::size_t, std::span<const double>, std::span<const double>)>
        state_observer;
};

inline CoreOptions make_core_options(const SolverConfig& cfg, double b_norm, std::size_t n,
                                     std::size_t default_maxit) {
    if (!(cfg.tol > 0.0)) throw std::invalid_argument("tol must be positive");
    CoreOptions o;
    o.history_denom = b_norm > 0.0 ? b_norm : 1.0;
    o.abs_tol = cfg.tol * o.history_denom;
    o.maxit = cfg.maxit != 0 ? cfg.maxit : std::max<std::size_t>(default_maxit, 1);
    o.breakdown_guard = cfg.breakdown_guard;
    o.restart_on_breakdown = cfg.restart_on_breakdown;
    o.collect_iterates = cfg.collect_iterates;
    o.stagnation_window = 2 * n;
    return o;
}

inline std::size_t symmetric_default_maxit(std::size_t n) {
    return static_cast<std::size_t>(std::llround(1.1 * static_cast<double>(n)));
}

/// The recurrence scalars beta = omega^2 / (theta phi - omega^2) and
/// gamma = (theta / omega) beta, evaluated through the Gram determinant
/// theta phi - omega^2 = theta * phi_perp with
/// phi_perp = (y - (psi/theta) W^{-1}p)^T W (y - (psi/theta) W^{-1}p) and
/// psi = p^T y (= -omega in exact arithmetic). The projected form avoids the
/// scalar cancellation of theta phi / omega^2 - 1 when progress stalls.
/// Arguments: wy = W y and winv_p = W^{-1} p, both maintained by every
/// weighting variant.
struct RecurrenceScalars {
    double beta = 0.0;
    double gamma = 0.0;
    bool breakdown = false;
};

/// omega is the paper's omega_{k-1} = ||r_{k-1}||^2.
inline RecurrenceScalars recurrence_scalars(double theta, double omega,
                                            std::span<const double> p,
                                            std::span<const double> y,
                                            std::span<const double> wy,
                                            std::span<const double> winv_p,
                                            double breakdown_guard) {
    RecurrenceScalars out;
    if (theta == 0.0) {
        out.breakdown = true;
        return out;
    }
    const double s = dot(p, y) / theta;
    double phi_perp = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        phi_perp += (y[i] - s * winv_p[i]) * (wy[i] - s * p[i]);
    // theta * phi_perp = theta phi - omega^2, so the usual guard
    // |theta phi / omega^2 - 1| < g reads |theta phi_perp| < g omega^2.
    if (std::abs(theta * phi_perp) < breakdown_guard * omega * omega) {
        out.breakdown = true;
        return out;
    }
    out.beta = omega * omega / (theta * phi_perp);
    out.gamma = omega / phi_perp;
    return out;
}

/// Residual history, iterate collection, and the stall detector shared by
/// all iterative solvers.
class SolveTracker {
public:
    SolveTracker(double denom, bool collect, std::size_t window)
        : denom_(denom), collect_(collect), window_(window) {}

    void record(std::size_t k, double residual_norm, const std::vector<double>& x) {
        last_k_ = k;
        history_.push_back(residual_norm / denom_);
        if (collect_) iterates_.push_back(x);
        note_improvement(k, residual_norm / denom_);
    }

    void amend_last(double residual_norm) {
        history_.back() = residual_norm / denom_;
        note_improvement(last_k_, residual_norm / denom_);
    }

    bool stagnated(std::size_t k) const {
        return window_ != 0 && k >= best_iteration_ + window_;
    }

    void fill_report(SolveReport& rep) {
        rep.residual_history = std::move(history_);
        rep.iterates = std::move(iterates_);
    }

private:
    void note_improvement(std::size_t k, double rel) {
        if (rel < best_ * (1.0 - stagnation_improvement_factor())) {
            best_ = rel;
            best_iteration_ = k;
        }
    }

    double denom_;
    bool collect_;
    std::size_t window_;
    std::vector<double> history_;
    std::vector<std::vector<double>> iterates_;
    double best_ = std::numeric_limits<double>::infinity();
    std::size_t best_iteration_ = 0;
    std::size_t last_k_ = 0;
};

/// Wrap a solver body with wall-clock timing and operator-counter deltas.
template <typename Body>
SolveReport timed_run(LinearOperator& a, Body&& body) {
    const std::uint64_t mv0 = a.matvec_count();
    const std::uint64_t tmv0 = a.transpose_matvec_count();
    const auto t0 = std::chrono::steady_clock::now();
    SolveReport rep = body();
    const auto t1 = std::chrono::steady_clock::now();
    rep.seconds = std::chrono::duration<double>(t1 - t0).count();
    rep.matvecs = a.matvec_count() - mv0;
    rep.transpose_matvecs = a.transpose_matvec_count() - tmv0;
    return rep;
}

inline void check_system_dims(const LinearOperator& a, std::span<const double> b,
                              std::span<const double> x0) {
    if (b.size() != a.nrows()) throw std::invalid_argument("right-hand side length mismatch");
    if (x0.size() != a.ncols()) throw std::invalid_argument("initial guess length mismatch");
}

/// Residual-sketch recurrence with W = I or a diagonal W = B^{-1}
/// (w_diag holds the W entries; empty means identity). Two operator
/// applications per iteration: v = A p and y = A^T r.
inline SolveReport plss_residual_core(LinearOperator& a, std::span<const double> b,
                                      std::span<const double> x0,
                                      const std::vector<double>& w_diag,
                                      const CoreOptions& opt) {
    check_system_dims(a, b, x0);
    const std::size_t m = a.nrows();
    const std::size_t n = a.ncols();
    if (!w_diag.empty() && w_diag.size() != n)
        throw std::invalid_argument("diagonal weight length mismatch");

    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> r(m), y(n), w(n), p(n), v(m), winv_p(w_diag.empty() ? 0 : n);

    auto refresh_true_residual = [&]() {
        a.apply(x, v);
        for (std::size_t i = 0; i < m; ++i) r[i] = b[i] - v[i];
        return norm2(r);
    };
    // Verification leaves the recurrence state untouched.
    auto true_residual_norm = [&]() {
        a.apply(x, v);
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double d = b[i] - v[i];
            sum += d * d;
        }
        return std::sqrt(sum);
    };
    // A failed verification halves this bar before the next claim.
    double claim_bar = std::numeric_limits<double>::infinity();
    auto apply_weight = [&]() {
        if (w_diag.empty())
            std::copy(y.begin(), y.end(), w.begin());
        else
            for (std::size_t i = 0; i < n; ++i) w[i] = w_diag[i] * y[i];
    };
    auto theta_of_p = [&]() {
        if (w_diag.empty()) return norm2_squared(p);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += p[i] * p[i] / w_diag[i];
        return s;
    };

    SolveReport rep;
    SolveTracker tracker(opt.history_denom, opt.collect_iterates, opt.stagnation_window);
    std::size_t k = 0;
    double rnorm = refresh_true_residual();
    bool r_is_true = true;
    tracker.record(0, rnorm, x);

    SolveStatus status = SolveStatus::MaxIterations;
    bool done = rnorm <= opt.abs_tol;
    if (done) status = SolveStatus::Converged;

    while (!done) {
        // Initialization block (also the restart target): p_1 = (omega/phi) W y.
        a.apply_transpose(r, y);
        apply_weight();
        double omega = rnorm * rnorm;
        double phi = dot(y, w);
        if (!(phi > 0.0)) {
            // A^T r = 0 with r != 0: normal equations are satisfied, no
            // residual-reducing direction exists.
            status = SolveStatus::Stagnation;
            break;
        }
        scaled_copy(omega / phi, w, p);
        a.apply(p, v);
        axpy(1.0, p, x);
        for (std::size_t i = 0; i < m; ++i) r[i] -= v[i];
        rnorm = norm2(r);
        r_is_true = false;
        a.apply_transpose(r, y);
        apply_weight();
        ++k;
        tracker.record(k, rnorm, x);

        bool restart = false;
        while (!done && !restart) {
            if (rnorm <= opt.abs_tol && rnorm < claim_bar) {
                // The recurrence residual drifts; convergence is declared
                // only against the recomputed true residual.
                const double true_norm = true_residual_norm();
                if (true_norm <= opt.abs_tol) {
                    tracker.amend_last(true_norm);
                    status = SolveStatus::Converged;
                    done = true;
                    break;
                }
                claim_bar = 0.5 * rnorm;
            }
            if (k >= opt.maxit || tracker.stagnated(k)) {
                status = k >= opt.maxit ? SolveStatus::MaxIterations : SolveStatus::Stagnation;
                if (!r_is_true) {
                    rnorm = refresh_true_residual();
                    tracker.amend_last(rnorm);
                }
                // The drifted recurrence value can overestimate: the run
                // converged if the recomputed residual meets the tolerance.
                if (rnorm <= opt.abs_tol) status = SolveStatus::Converged;
                done = true;
                break;
            }

            const double theta = theta_of_p();
            const double omega_k = rnorm * rnorm;
            if (!w_diag.empty())
                for (std::size_t i = 0; i < n; ++i) winv_p[i] = p[i] / w_diag[i];
            const RecurrenceScalars sc = recurrence_scalars(
                theta, omega_k, p, y, w,
                w_diag.empty() ? std::span<const double>(p) : std::span<const double>(winv_p),
                opt.breakdown_guard);
            if (sc.breakdown) {
                if (opt.restart_on_breakdown) {
                    rnorm = refresh_true_residual();
                    r_is_true = true;
                    restart = true;
                    break;
                }
                status = SolveStatus::Breakdown;
                if (!r_is_true) {
                    rnorm = refresh_true_residual();
                    tracker.amend_last(rnorm);
                }
                done = true;
                break;
            }

            recurrence_update(sc.beta, sc.gamma, w, p);  // p_k = beta p + gamma W y
            a.apply(p, v);
            axpy(1.0, p, x);
            for (std::size_t i = 0; i < m; ++i) r[i] -= v[i];
            rnorm = norm2(r);
            r_is_true = false;
            a.apply_transpose(r, y);
            apply_weight();
            ++k;
            tracker.record(k, rnorm, x);
        }
    }

    rep.status = status;
    rep.iterations = k;
    rep.final_x = std::move(x);
    tracker.fill_report(rep);
    return rep;
}

/// B = A recurrence for symmetric A (definite or indefinite). The inverse
/// weight cancels: W y = r, so one matvec per iteration, y = A r.
inline SolveReport plss_a_core(LinearOperator& a, std::span<const double> b,
                               std::span<const double> x0, const CoreOptions& opt) {
    check_system_dims(a, b, x0);
    if (a.nrows() != a.ncols())
        throw std::invalid_argument("B = A weighting requires a square symmetric operator");
    const std::size_t n = a.ncols();

    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> r(n), y(n), p(n), v(n), scratch(n);

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
    SolveTracker tracker(opt.history_denom, opt.collect_iterates, opt.stagnation_window);
    std::size_t k = 0;
    double rnorm = refresh_true_residual();
    bool r_is_true = true;
    tracker.record(0, rnorm, x);

    SolveStatus status = SolveStatus::MaxIterations;
    bool done = rnorm <= opt.abs_tol;
    if (done) status = SolveStatus::Converged;

    while (!done) {
        a.apply(r, y);  // y = A r (A symmetric)
        double omega = rnorm * rnorm;
        double phi = dot(y, r);
        if (std::abs(phi) <=
            std::numeric_limits<double>::epsilon() * norm2(y) * rnorm) {
            // r^T A r numerically zero: the first step is undefined and a
            // restart from the same x cannot change it.
            status = SolveStatus::Breakdown;
            break;
        }
        const double scale = omega / phi;
        scaled_copy(scale, r, p);
        scaled_copy(scale, y, v);  // v_1 = A p_1, no extra matvec
        axpy(1.0, p, x);
        for (std::size_t i = 0; i < n; ++i) r[i] -= v[i];
        rnorm = norm2(r);
        r_is_true = false;
        a.apply(r, y);
        ++k;
        tracker.record(k, rnorm, x);
        if (opt.state_observer) opt.state_observer(k, p, v);

        bool restart = false;
        while (!done && !restart) {
            if (rnorm <= opt.abs_tol && rnorm < claim_bar) {
                const double true_norm = true_residual_norm();
                if (true_norm <= opt.abs_tol) {
                    tracker.amend_last(true_norm);
                    status = SolveStatus::Converged;
                    done = true;
                    break;
                }
                claim_bar = 0.5 * rnorm;
            }
            if (k >= opt.maxit || tracker.stagnated(k)) {
                status = k >= opt.maxit ? SolveStatus::MaxIterations : SolveStatus::Stagnation;
                if (!r_is_true) {
                    rnorm = refresh_true_residual();
                    tracker.amend_last(rnorm);
                }
                if (rnorm <= opt.abs_tol) status = SolveStatus::Converged;
                done = true;
                break;
            }

            const double theta = dot(p, v);
            const double omega_k = rnorm * rnorm;
            // W y = r and W^{-1} p = v under the B = A weighting.
            const RecurrenceScalars sc =
                recurrence_scalars(theta, omega_k, p, y, r, v, opt.breakdown_guard);
            if (sc.breakdown) {
                if (opt.restart_on_breakdown) {
                    rnorm = refresh_true_residual();
                    r_is_true = true;
                    restart = true;
                    break;
                }
                status = SolveStatus::Breakdown;
                if (!r_is_true) {
                    rnorm = refresh_true_residual();
                    tracker.amend_last(rnorm);
                }
                done = true;
                break;
            }

            recurrence_update(sc.beta, sc.gamma, y, v);  // v_k = beta v + gamma y
            recurrence_update(sc.beta, sc.gamma, r, p);  // p_k = beta p + gamma r
            axpy(1.0, p, x);
            for (std::size_t i = 0; i < n; ++i) r[i] -= v[i];
            rnorm = norm2(r);
            r_is_true = false;
            a.apply(r, y);
            ++k;
            tracker.record(k, rnorm, x);
            if (opt.state_observer) opt.state_observer(k, p, v);
        }
    }

    rep.status = status;
    rep.iterations = k;
    rep.final_x = std::move(x);
    tracker.fill_report(rep);
    return rep;
}

/// B = A^{-1} recurrence for spd A. The companion vector u_k tracks
/// A^{-1} p_k. Three matvecs per iteration: r = b - A x, y = A r, w = A y;
/// the residual is exact at every step, so no verification pass is needed.
inline SolveReport plss_spd_inverse_weight_core(LinearOperator& a, std::span<const double> b,
                                                std::span<const double> x0,
                                                const CoreOptions& opt) {
    check_system_dims(a, b, x0);
    if (a.nrows() != a.ncols())
        throw std::invalid_argument("B = A^{-1} weighting requires a square symmetric operator");
    const std::size_t n = a.ncols();

    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> r(n), y(n), w(n), p(n), u(n), scratch(n);

    auto refresh_true_residual = [&]() {
        a.apply(x, scratch);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - scratch[i];
        return norm2(r);
    };

    SolveReport rep;
    SolveTracker tracker(opt.history_denom, opt.collect_iterates, opt.stagnation_window);
    std::size_t k = 0;
    double rnorm = refresh_true_residual();
    tracker.record(0, rnorm, x);

    SolveStatus status = SolveStatus::MaxIterations;
    bool done = rnorm <= opt.abs_tol;
    if (done) status = SolveStatus::Converged;

    while (!done) {
        a.apply(r, y);  // y = A r
        a.apply(y, w);  // w = A y
        double omega = rnorm * rnorm;
        double phi = dot(y, w);
        if (!(phi > 0.0)) {
            status = SolveStatus::Breakdown;
            break;
        }
        const double scale = omega / phi;
        scaled_copy(scale, y, u);  // u_1 = A^{-1} p_1
        scaled_copy(scale, w, p);
        axpy(1.0, p, x);
        rnorm = refresh_true_residual();
        a.apply(r, y);
        a.apply(y, w);
        ++k;
        tracker.record(k, rnorm, x);
        if (opt.state_observer) opt.state_observer(k, p, u);

        bool restart = false;
        while (!done && !restart) {
            if (rnorm <= opt.abs_tol) {
                status = SolveStatus::Converged;
                done = true;
                break;
            }
            if (k >= opt.maxit || tracker.stagnated(k)) {
                status = k >= opt.maxit ? SolveStatus::MaxIterations : SolveStatus::Stagnation;
                done = true;
                break;
            }

            const double theta = dot(p, u);
            const double omega_k = rnorm * rnorm;
            // W y = w and W^{-1} p = u under the B = A^{-1} weighting.
            const RecurrenceScalars sc =
                recurrence_scalars(theta, omega_k, p, y, w, u, opt.breakdown_guard);
            if (sc.breakdown) {
                if (opt.restart_on_breakdown) {
                    restart = true;
                    break;
                }
                status = SolveStatus::Breakdown;
                done = true;
                break;
            }

            recurrence_update(sc.beta, sc.gamma, y, u);  // u_k = beta u + gamma y
            recurrence_update(sc.beta, sc.gamma, w, p);  // p_k = beta p + gamma w
            axpy(1.0, p, x);
            rnorm = refresh_true_residual();
            a.apply(r, y);
            a.apply(y, w);
            ++k;
            tracker.record(k, rnorm, x);
            if (opt.state_observer) opt.state_observer(k, p, u);
        }
    }

    rep.status = status;
    rep.iterations = k;
    rep.final_x = std::move(x);
    tracker.fill_report(rep);
    return rep;
}

inline void require_symmetric(const SparseMatrixCSR& a, const char* solver) {
    if (!a.is_symmetric())
        throw std::invalid_argument(std::string(solver) +
                                    ": matrix is not symmetric on the stored pattern");
}

}  // namespace detail

/// Inner stopping tolerance of the nested B = A^T A scheme: eps_0 for the
/// first outer solve, ||r_{k-1}|| / (k-1) afterwards.
inline double nested_inner_tolerance(std::size_t outer_k, double residual_norm, double eps0) {
    if (outer_k <= 1) return eps0;
    return residual_norm / static_cast<double>(outer_k - 1);
}

/// PLSS with B = I: the baseline residual-sketch recurrence for general
/// (square or rectangular consistent) systems. Two operator applications
/// per iteration.
inline SolveReport plss_identity(LinearOperator& a, std::span<const double> b,
                                 std::span<const double> x0, const SolverConfig& cfg) {
    return detail::timed_run(a, [&] {
        const auto opt = detail::make_core_options(cfg, norm2(b), a.ncols(), a.ncols());
        return detail::plss_residual_core(a, b, x0, {}, opt);
    });
}

inline SolveReport plss_identity(const SparseMatrixCSR& a, std::span<const double> b,
                                 std::span<const double> x0, const SolverConfig& cfg) {
    LinearOperator op = make_operator(a);
    return plss_identity(op, b, x0, cfg);
}

/// PLSS with B = diag(||a_1||, ..., ||a_n||) built from the column norms.
inline SolveReport plss_diag(LinearOperator& a, std::span<const double> b,
                             std::span<const double> x0, const SolverConfig& cfg,
                             std::span<const double> column_norms) {
    if (column_norms.size() != a.ncols())
        throw std::invalid_argument("plss_diag: column norm length mismatch");
    std::vector<double> w_diag(column_norms.size());
    for (std::size_t j = 0; j < column_norms.size(); ++j) {
        if (!(column_norms[j] > 0.0))
            throw std::invalid_argument("singular diagonal weight: column " + std::to_string(j) +
                                        " has zero norm");
        w_diag[j] = 1.0 / column_norms[j];
    }
    return detail::timed_run(a, [&] {
        const auto opt = detail::make_core_options(cfg, norm2(b), a.ncols(), a.ncols());
        return detail::plss_residual_core(a, b, x0, w_diag, opt);
    });
}

inline SolveReport plss_diag(const SparseMatrixCSR& a, std::span<const double> b,
                             std::span<const double> x0, const SolverConfig& cfg) {
    LinearOperator op = make_operator(a);
    const auto norms = a.column_norms();
    return plss_diag(op, b, x0, cfg, norms);
}

/// PLSS with B = A for symmetric A, definite or indefinite. One matvec per
/// iteration. Operator inputs are trusted to be symmetric; the CSR overload
/// verifies symmetry exactly.
inline SolveReport plss_a(LinearOperator& a, std::span<const double> b,
                          std::span<const double> x0, const SolverConfig& cfg) {
    return detail::timed_run(a, [&] {
        const auto opt = detail::make_core_options(cfg, norm2(b), a.ncols(),
                                                   detail::symmetric_default_maxit(a.ncols()));
        return detail::plss_a_core(a, b, x0, opt);
    });
}

inline SolveReport plss_a(const SparseMatrixCSR& a, std::span<const double> b,
                          std::span<const double> x0, const SolverConfig& cfg) {
    detail::require_symmetric(a, "plss_a");
    LinearOperator op = make_operator(a);
    return plss_a(op, b, x0, cfg);
}

/// PLSS with B = A^{-1} for spd A. Three matvecs per iteration.
inline SolveReport plss_spd_inverse_weight(LinearOperator& a, std::span<const double> b,
                                           std::span<const double> x0, const SolverConfig& cfg) {
    return detail::timed_run(a, [&] {
        const auto opt = detail::make_core_options(cfg, norm2(b), a.ncols(),
                                                   detail::symmetric_default_maxit(a.ncols()));
        return detail::plss_spd_inverse_weight_core(a, b, x0, opt);
    });
}

inline SolveReport plss_spd_inverse_weight(const SparseMatrixCSR& a, std::span<const double> b,
                                           std::span<const double> x0, const SolverConfig& cfg) {
    detail::require_symmetric(a, "plss_spd_inverse_weight");
    LinearOperator op = make_operator(a);
    return plss_spd_inverse_weight(op, b, x0, cfg);
}

/// PLSS with B = A^T A for general square systems: each outer update solves
/// A p_k = r_{k-1} approximately with the B = I recurrence. Inner iteration
/// counts are not outer iterations but their matvecs aggregate into the
/// report. eps0 <= 0 selects max(tol * ||b||, 0.1 * ||r_0||); the warm start
/// scales the previous update.
inline SolveReport plss_nested(LinearOperator& a, std::span<const double> b,
                               std::span<const double> x0, const SolverConfig& cfg,
                               std::size_t inner_maxit = 0, double eps0 = 0.0,
                               double warm_start_factor = 0.8) {
    if (a.nrows() != a.ncols())
        throw std::invalid_argument("plss_nested: operator must be square");
    detail::check_system_dims(a, b, x0);
    return detail::timed_run(a, [&] {
        const std::size_t n = a.ncols();
        const auto opt = detail::make_core_options(cfg, norm2(b), n, n);
        const std::size_t inner_cap = inner_maxit != 0 ? inner_maxit : 10 * n;

        std::vector<double> x(x0.begin(), x0.end());
        std::vector<double> r(n), scratch(n);
        auto refresh_true_residual = [&]() {
            a.apply(x, scratch);
            for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - scratch[i];
            return norm2(r);
        };

        SolveReport rep;
        detail::SolveTracker tracker(opt.history_denom, opt.collect_iterates,
                                     opt.stagnation_window);
        double rnorm = refresh_true_residual();
        tracker.record(0, rnorm, x);
        const double eps_first = eps0 > 0.0 ? eps0 : std::max(opt.abs_tol, 0.1 * rnorm);

        SolveStatus status = SolveStatus::MaxIterations;
        std::size_t k = 0;
        if (rnorm <= opt.abs_tol) status = SolveStatus::Converged;

        std::vector<double> p_prev(n, 0.0);
        while (status != SolveStatus::Converged && k < opt.maxit) {
            if (tracker.stagnated(k)) {
                status = SolveStatus::Stagnation;
                break;
            }
            const double eps_k = nested_inner_tolerance(k + 1, rnorm, eps_first);
            std::vector<double> inner_x0(n, 0.0);
            if (k > 0) scaled_copy(warm_start_factor, p_prev, inner_x0);

            detail::CoreOptions inner_opt;
            inner_opt.abs_tol = eps_k;
            inner_opt.history_denom = rnorm > 0.0 ? rnorm : 1.0;
            inner_opt.maxit = inner_cap;
            inner_opt.breakdown_guard = cfg.breakdown_guard;
            inner_opt.restart_on_breakdown = cfg.restart_on_breakdown;
            inner_opt.stagnation_window = 2 * n;
            // A p = r solved approximately; hitting the inner cap is fine.
            SolveReport inner = detail::plss_residual_core(a, r, inner_x0, {}, inner_opt);
            p_prev = std::move(inner.final_x);

            axpy(1.0, p_prev, x);
            rnorm = refresh_true_residual();
            ++k;
            tracker.record(k, rnorm, x);
            if (rnorm <= opt.abs_tol) status = SolveStatus::Converged;
        }

        rep.status = status;
        rep.iterations = k;
        rep.final_x = std::move(x);
        tracker.fill_report(rep);
        return rep;
    });
}

inline SolveReport plss_nested(const SparseMatrixCSR& a, std::span<const double> b,
                               std::span<const double> x0, const SolverConfig& cfg,
                               std::size_t inner_maxit = 0, double eps0 = 0.0,
                               double warm_start_factor = 0.8) {
    LinearOperator op = make_operator(a);
    return plss_nested(op, b, x0, cfg, inner_maxit, eps0, warm_start_factor);
}

/// Least squares min ||A x - b|| via the B = A weighting on the normal
/// equations A^T A x = A^T b; each product with A^T A is two products with
/// A. Stopping is measured on the normal-equations residual; the
/// original-system relative residual at exit lands in
/// aux_residual_history[0].
inline SolveReport least_squares_solve(LinearOperator& a, std::span<const double> b,
                                       std::span<const double> x0, const SolverConfig& cfg) {
    if (a.nrows() < a.ncols())
        throw std::invalid_argument("least_squares_solve: system must have m >= n");
    if (b.size() != a.nrows()) throw std::invalid_argument("right-hand side length mismatch");
    return detail::timed_run(a, [&] {
        const std::vector<double> bhat = a.apply_transpose(b);
        LinearOperator ahat = normal_equations_operator(a);
        const auto opt = detail::make_core_options(
            cfg, norm2(bhat), a.ncols(), detail::symmetric_default_maxit(a.ncols()));
        SolveReport rep = detail::plss_a_core(ahat, bhat, x0, opt);

        std::vector<double> resid = a.apply(rep.final_x);
        for (std::size_t i = 0; i < resid.size(); ++i) resid[i] = b[i] - resid[i];
        const double b_norm = norm2(b);
        rep.aux_residual_history = {norm2(resid) / (b_norm > 0.0 ? b_norm : 1.0)};
        return rep;
    });
}

inline SolveReport least_squares_solve(const SparseMatrixCSR& a, std::span<const double> b,
                                       std::span<const double> x0, const SolverConfig& cfg) {
    LinearOperator op = make_operator(a);
    return least_squares_solve(op, b, x0, cfg);
}

}  // namespace plss
