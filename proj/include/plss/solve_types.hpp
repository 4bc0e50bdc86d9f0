#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace plss {

enum class SolveStatus {
    Converged,
    MaxIterations,
    Breakdown,
    Stagnation,
    Error,  ///< benchmark rows for problems or solvers that could not run
};

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::MaxIterations: return "max_iterations";
        case SolveStatus::Breakdown: return "breakdown";
        case SolveStatus::Stagnation: return "stagnation";
        case SolveStatus::Error: return "error";
    }
    return "unknown";
}

struct SolverConfig {
    /// Relative-residual stopping tolerance, ||b - A x|| / ||b|| <= tol.
    double tol = 1e-4;
    /// Iteration cap; 0 selects the dimension-derived default of the solver
    /// (round(1.1 n) for the symmetric variants, n otherwise).
    std::size_t maxit = 0;
    std::uint64_t seed = 0;
    /// Denominator guard for the recurrence scalar beta.
    double breakdown_guard = std::sqrt(std::numeric_limits<double>::epsilon());
    /// Verify the true residual every N iterations; 0 verifies only when the
    /// recurrence claims convergence. Row-action solvers with no recurrence
    /// residual treat 0 as N = n.
    std::size_t true_residual_check = 0;
    bool restart_on_breakdown = true;
    /// Record x after every iteration in SolveReport::iterates.
    bool collect_iterates = false;
};

struct SolveReport {
    SolveStatus status = SolveStatus::Error;
    std::size_t iterations = 0;
    std::uint64_t matvecs = 0;
    std::uint64_t transpose_matvecs = 0;
    /// Relative residuals, entry k after iteration k; entry 0 is the initial
    /// residual and the final entry is recomputed from b - A x at exit.
    std::vector<double> residual_history;
    double seconds = 0.0;
    std::vector<double> final_x;
    /// Least-squares runs store the original-system relative residual at
    /// exit here; empty otherwise.
    std::vector<double> aux_residual_history;
    /// Populated when SolverConfig::collect_iterates is set: x0, x1, ...
    std::vector<std::vector<double>> iterates;

    double final_relative_residual() const {
        return residual_history.empty() ? std::numeric_limits<double>::quiet_NaN()
                                        : residual_history.back();
    }
};

}  // namespace plss
