#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "plss/cg.hpp"
#include "plss/oracles.hpp"
#include "plss/sketch_project.hpp"
#include "plss/solvers.hpp"
#include "support/test_matrices.hpp"

namespace pt = plss::testing;
using plss::DenseMatrix;
using plss::SolveStatus;
using plss::SolverConfig;
using plss::SparseMatrixCSR;

namespace {

struct SpyCounts {
    std::uint64_t apply = 0;
    std::uint64_t apply_transpose = 0;
    std::uint64_t total() const { return apply + apply_transpose; }
};

plss::LinearOperator spy_operator(const SparseMatrixCSR& a, SpyCounts& counts) {
    return plss::LinearOperator(
        a.nrows(), a.ncols(),
        [&a, &counts](std::span<const double> x, std::span<double> y) {
            ++counts.apply;
            a.multiply(x, y);
        },
        [&a, &counts](std::span<const double> r, std::span<double> y) {
            ++counts.apply_transpose;
            a.multiply_transpose(r, y);
        });
}

SolverConfig tight_config(std::size_t maxit, double tol = 1e-10) {
    SolverConfig cfg;
    cfg.tol = tol;
    cfg.maxit = maxit;
    return cfg;
}

std::vector<double> zeros(std::size_t n) { return std::vector<double>(n, 0.0); }

}  // namespace

TEST(PlssIdentity, FirstIterationHandValues) {
    const auto a = pt::csr_2x2(4, 1, 1, 3);
    const std::vector<double> b{1, 2};
    SolverConfig cfg = tight_config(10);
    cfg.collect_iterates = true;

    const auto rep = plss::plss_identity(a, b, zeros(2), cfg);
    ASSERT_GE(rep.iterates.size(), 2u);
    // p_1 = (omega_0/phi_0) y_0 with omega_0 = 5, phi_0 = 85.
    EXPECT_NEAR(rep.iterates[1][0], 6.0 / 17.0, 1e-14);
    EXPECT_NEAR(rep.iterates[1][1], 7.0 / 17.0, 1e-14);

    const auto r1 = pt::true_residual(a, b, rep.iterates[1]);
    EXPECT_NEAR(r1[0], -14.0 / 17.0, 1e-14);
    EXPECT_NEAR(r1[1], 7.0 / 17.0, 1e-14);
    EXPECT_NEAR(1.0 * r1[0] + 2.0 * r1[1], 0.0, 1e-14);  // r_0^T r_1 = 0
}

TEST(PlssIdentity, IdentityMatrixConvergesInOneStep) {
    const auto eye = pt::csr_from_dense(DenseMatrix::identity(5));
    plss::CounterRng rng(4);
    const auto b = pt::random_vector(5, rng);
    const auto rep = plss::plss_identity(eye, b, zeros(5), tight_config(10));
    EXPECT_EQ(rep.status, SolveStatus::Converged);
    EXPECT_EQ(rep.iterations, 1u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(rep.final_x[i], b[i], 1e-12);
}

TEST(PlssIdentity, ExactInitialGuessIsZeroIterations) {
    const auto a = pt::csr_2x2(4, 1, 1, 3);
    const std::vector<double> x_true{1.0 / 11.0, 7.0 / 11.0};
    const auto rep = plss::plss_identity(a, std::vector<double>{1, 2}, x_true, tight_config(10));
    EXPECT_EQ(rep.status, SolveStatus::Converged);
    EXPECT_EQ(rep.iterations, 0u);
    EXPECT_EQ(rep.residual_history.size(), 1u);
}

TEST(PlssIdentity, FiniteTerminationOnTwoByTwo) {
    const auto a = pt::csr_2x2(4, 1, 1, 3);
    const auto rep = plss::plss_identity(a, std::vector<double>{1, 2}, zeros(2),
                                         tight_config(10, 1e-12));
    EXPECT_EQ(rep.status, SolveStatus::Converged);
    EXPECT_LE(rep.iterations, 3u);
    EXPECT_NEAR(rep.final_x[0], 1.0 / 11.0, 1e-10);
    EXPECT_NEAR(rep.final_x[1], 7.0 / 11.0, 1e-10);
}

TEST(PlssDiag, IdentityWeightMatchesPlssIdentity) {
    const auto eye = pt::csr_from_dense(DenseMatrix::identity(6));
    plss::CounterRng rng(8);
    const auto b = pt::random_vector(6, rng);
    SolverConfig cfg = tight_config(12);
    cfg.collect_iterates = true;
    const auto ri = plss::plss_identity(eye, b, zeros(6), cfg);
    const auto rd = plss::plss_diag(eye, b, zeros(6), cfg);
    ASSERT_EQ(ri.iterates.size(), rd.iterates.size());
    for (std::size_t k = 0; k < ri.iterates.size(); ++k)
        for (std::size_t i = 0; i < 6; ++i)
            EXPECT_DOUBLE_EQ(ri.iterates[k][i], rd.iterates[k][i]);
}

TEST(PlssDiag, ConvergesOnTwoByTwo) {
    const auto a = pt::csr_2x2(4, 1, 1, 3);
    const auto rep = plss::plss_diag(a, std::vector<double>{1, 2}, zeros(2),
                                     tight_config(10, 1e-12));
    EXPECT_EQ(rep.status, SolveStatus::Converged);
    EXPECT_LE(rep.iterations, 3u);
    EXPECT_NEAR(rep.final_x[0], 1.0 / 11.0, 1e-10);
    EXPECT_NEAR(rep.final_x[1], 7.0 / 11.0, 1e-10);
}

TEST(PlssDiag, ZeroColumnIsRejected) {
    const auto a = SparseMatrixCSR::from_triplets(
        2, 2, std::vector<plss::Triplet>{{0, 0, 1}, {1, 0, 2}});
    try {
        plss::plss_diag(a, std::vector<double>{1, 1}, zeros(2), tight_config(5));
        FAIL() << "expected singular weight error";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("singular diagonal weight"), std::string::npos);
    }
}

TEST(PlssA, HandIterates) {
    const auto a = pt::csr_2x2(4, 1, 1, 3);
    const std::vector<double> b{1, 2};
    SolverConfig cfg = tight_config(10, 1e-13);
    cfg.collect_iterates = true;

    const auto rep = plss::plss_a(a, b, zeros(2), cfg);
    ASSERT_GE(rep.iterates.size(), 3u);
    EXPECT_NEAR(rep.iterates[1][0], 0.25, 1e-15);
    EXPECT_NEAR(rep.iterates[1][1], 0.5, 1e-15);
    const auto r1 = pt::true_residual(a, b, rep.iterates[1]);
    EXPECT_NEAR(r1[0], -0.5, 1e-14);
    EXPECT_NEAR(r1[1], 0.25, 1e-14);
    // beta_1 = 1/11, gamma_1 = 4/11 land exactly on the solution.
    EXPECT_NEAR(rep.iterates[2][0], 1.0 / 11.0, 1e-14);
    EXPECT_NEAR(rep.iterates[2][1], 7.0 / 11.0, 1e-14);
}

TEST(PlssA, IdentityConvergesInOneStep) {
    const auto eye = pt::csr_from_dense(DenseMatrix::identity(4));
    const std::vector<double> b{2, -1, 0.5, 3};
    const auto rep = plss::plss_a(eye, b, zeros(4), tight_config(8));
    EXPECT_EQ(rep.status, SolveStatus::Converged);
    EXPECT_EQ(rep.iterations, 1u);
}

TEST(PlssA, TenByTenSpdDropsAtFiniteTermination) {
    const auto dense = pt::spd_matrix(10, 1e3, 21);
    const auto a = pt::csr_from_dense(dense);
    const auto b = a.multiply(std::vector<double>(10, 1.0));
    SolverConfig cfg = tight_config(10, 1e-300);
    cfg.restart_on_breakdown = false;
    const auto rep = plss::plss_a(a, b, zeros(10), cfg);
    ASSERT_EQ(rep.residual_history.size(), 11u);
    EXPECT_LE(rep.residual_history[10], 1e-10);
}

TEST(PlssA, RejectsNonsymmetricCsr) {
    const auto a = pt::csr_2x2(4, 1, 2, 3);
    EXPECT_THROW(plss::plss_a(a, std::vector<double>{1, 2}, zeros(2), tight_config(5)),
                 std::invalid_argument);
}

TEST(PlssSpdInverseWeight, ConvergesOnTwoByTwo) {
    const auto a = pt::csr_2x2(4, 1, 1, 3);
    const auto rep = plss::plss_spd_inverse_weight(a, std::vector<double>{1, 2}, zeros(2),
                                                   tight_config(10));
    EXPECT_EQ(rep.status, SolveStatus::Converged);
    EXPECT_LE(rep.iterations, 2u);
    EXPECT_NEAR(rep.final_x[0], 1.0 / 11.0, 1e-9);
    EXPECT_NEAR(rep.final_x[1], 7.0 / 11.0, 1e-9);
}

TEST(PlssSpdInverseWeight, IdentityConvergesInOneStep) {
    const auto eye = pt::csr_from_dense(DenseMatrix::identity(3));
    const auto rep = plss::plss_spd_inverse_weight(eye, std::vector<double>{1, 2, 3}, zeros(3),
                                                   tight_config(6));
    EXPECT_EQ(rep.status, SolveStatus::Converged);
    EXPECT_EQ(rep.iterations, 1u);
}

TEST(OperationCounts, ThreeMatvecsPerIterationForInverseWeight) {
    const auto dense = pt::spd_matrix(8, 1e2, 5);
    const auto a = pt::csr_from_dense(dense);
    const auto b = a.multiply(std::vector<double>(8, 1.0));
    for (std::size_t j : {2u, 5u}) {
        SpyCounts counts;
        auto op = spy_operator(a, counts);
        const auto rep = plss::plss_spd_inverse_weight(op, b, zeros(8), tight_config(j, 1e-300));
        EXPECT_EQ(rep.iterations, j);
        EXPECT_EQ(counts.apply, 3 * j + 3);  // 3 in initialization, 3 per iteration
        EXPECT_EQ(counts.apply_transpose, 0u);
        EXPECT_EQ(rep.matvecs, counts.apply);  // counter law
    }
}

TEST(OperationCounts, OneMatvecPerIterationForBEqualsA) {
    const auto dense = pt::spd_matrix(8, 1e2, 6);
    const auto a = pt::csr_from_dense(dense);
    const auto b = a.multiply(std::vector<double>(8, 1.0));
    SpyCounts prev;
    for (std::size_t j : {3u, 4u, 6u}) {
        SpyCounts counts;
        auto op = spy_operator(a, counts);
        const auto rep = plss::plss_a(op, b, zeros(8), tight_config(j, 1e-300));
        EXPECT_EQ(rep.iterations, j);
        // init: r_0 and y_0; one y = A r per iteration; one exit recompute.
        EXPECT_EQ(counts.apply, j + 3);
        EXPECT_EQ(counts.apply_transpose, 0u);
        EXPECT_EQ(rep.matvecs, counts.apply);
        prev = counts;
    }
}

TEST(OperationCounts, TwoApplicationsPerIterationForIdentity) {
    const auto a = pt::csr_from_dense(pt::general_matrix(8, 1e2, 9));
    const auto b = a.multiply(std::vector<double>(8, 1.0));
    for (std::size_t j : {3u, 5u}) {
        SpyCounts counts;
        auto op = spy_operator(a, counts);
        const auto rep = plss::plss_identity(op, b, zeros(8), tight_config(j, 1e-300));
        EXPECT_EQ(rep.iterations, j);
        // one matvec for v = A p per iteration, one transpose matvec for y;
        // plus the initial residual and the exit recompute.
        EXPECT_EQ(counts.apply, j + 2);
        EXPECT_EQ(counts.apply_transpose, j + 1);
        EXPECT_EQ(rep.matvecs, counts.apply);
        EXPECT_EQ(rep.transpose_matvecs, counts.apply_transpose);
    }
}

TEST(FiniteTermination, ResidualSketchVariantsReachToleranceByNPlusTwo) {
    // Double precision sustains the exact-arithmetic termination step only
    // while n * digits(cond) stays small; these cases sit inside that
    // envelope (the acceptance suite measures the full one).
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const std::size_t n = seed % 2 == 0 ? 6 : 12;
        const double cond = 20.0 + static_cast<double>(seed) * 15.0;
        SolverConfig cfg = tight_config(n + 2, 1e-8);

        const auto general = pt::csr_from_dense(pt::general_matrix(n, cond, 100 + seed));
        const auto bg = general.multiply(std::vector<double>(n, 1.0));
        EXPECT_EQ(plss::plss_identity(general, bg, zeros(n), cfg).status, SolveStatus::Converged);
        EXPECT_EQ(plss::plss_diag(general, bg, zeros(n), cfg).status, SolveStatus::Converged);

        const auto spd = pt::csr_from_dense(pt::spd_matrix(n, cond, 200 + seed));
        const auto bs = spd.multiply(std::vector<double>(n, 1.0));
        EXPECT_EQ(plss::plss_a(spd, bs, zeros(n), cfg).status, SolveStatus::Converged);

        const auto sid = pt::csr_from_dense(pt::symmetric_indefinite_matrix(n, cond, 300 + seed));
        const auto bi = sid.multiply(std::vector<double>(n, 1.0));
        EXPECT_EQ(plss::plss_a(sid, bi, zeros(n), cfg).status, SolveStatus::Converged);

        // The B = A^{-1} recurrence drifts fastest; keep it to the small case.
        const auto spd_small = pt::csr_from_dense(pt::spd_matrix(6, 30.0, 400 + seed));
        const auto bss = spd_small.multiply(std::vector<double>(6, 1.0));
        EXPECT_EQ(plss::plss_spd_inverse_weight(spd_small, bss, zeros(6), tight_config(8, 1e-8))
                      .status,
                  SolveStatus::Converged);
    }
}

TEST(ResidualOrthogonality, HoldsForMeaningfulResiduals) {
    const std::size_t n = 12;
    const auto a = pt::csr_from_dense(pt::general_matrix(n, 30.0, 77));
    const auto b = a.multiply(std::vector<double>(n, 1.0));
    SolverConfig cfg = tight_config(n + 2, 1e-8);
    cfg.collect_iterates = true;
    const auto rep = plss::plss_identity(a, b, zeros(n), cfg);

    // Residuals at the converged scale are rounding-dominated in direction;
    // compare only those above the stopping tolerance.
    std::vector<std::vector<double>> residuals;
    const double b_norm = plss::norm2(b);
    for (std::size_t k = 0; k < std::min<std::size_t>(rep.iterates.size(), 11); ++k) {
        auto r = pt::true_residual(a, b, rep.iterates[k]);
        if (plss::norm2(r) > 1e-6 * b_norm) residuals.push_back(std::move(r));
    }
    ASSERT_GE(residuals.size(), 4u);
    for (std::size_t i = 0; i < residuals.size(); ++i)
        for (std::size_t j = i + 1; j < residuals.size(); ++j) {
            const double bound =
                1e-8 * plss::norm2(residuals[i]) * plss::norm2(residuals[j]);
            EXPECT_LE(std::abs(plss::dot(residuals[i], residuals[j])), bound);
        }
}

TEST(UpdateOrthogonality, BEqualsAUpdatesAreAOrthogonal) {
    const std::size_t n = 12;
    const auto dense = pt::spd_matrix(n, 1e3, 31);
    const auto a = pt::csr_from_dense(dense);
    const auto b = a.multiply(std::vector<double>(n, 1.0));
    SolverConfig cfg = tight_config(n + 2, 1e-8);
    cfg.collect_iterates = true;
    const auto rep = plss::plss_a(a, b, zeros(n), cfg);

    std::vector<std::vector<double>> updates;
    const double b_norm = plss::norm2(b);
    for (std::size_t k = 1; k < std::min<std::size_t>(rep.iterates.size(), 11); ++k) {
        if (plss::norm2(pt::true_residual(a, b, rep.iterates[k - 1])) <= 1e-8 * b_norm) break;
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = rep.iterates[k][i] - rep.iterates[k - 1][i];
        updates.push_back(std::move(p));
    }
    ASSERT_GE(updates.size(), 4u);
    std::vector<double> a_norms;
    for (const auto& p : updates) a_norms.push_back(std::sqrt(plss::dot(p, a.multiply(p))));
    for (std::size_t i = 0; i < updates.size(); ++i)
        for (std::size_t j = i + 1; j < updates.size(); ++j) {
            const double inner = std::abs(plss::dot(updates[i], a.multiply(updates[j])));
            EXPECT_LE(inner, 1e-8 * a_norms[i] * a_norms[j]);
        }
}

TEST(CompanionVectors, TrackTheirDefinitions) {
    const std::size_t n = 10;
    const auto dense = pt::spd_matrix(n, 1e3, 55);
    const auto a = pt::csr_from_dense(dense);
    const auto b = a.multiply(std::vector<double>(n, 1.0));
    const double a_scale = dense.norm_inf();

    plss::detail::CoreOptions opt;
    opt.abs_tol = 1e-8 * plss::norm2(b);
    opt.history_denom = plss::norm2(b);
    opt.maxit = n + 2;
    opt.stagnation_window = 2 * n;

    {
        auto op = plss::make_operator(a);
        opt.state_observer = [&](std::size_t, std::span<const double> p,
                                 std::span<const double> v) {
            // v tracks A p.
            const auto ap = a.multiply(p);
            double diff = 0.0;
            for (std::size_t i = 0; i < n; ++i) diff += (v[i] - ap[i]) * (v[i] - ap[i]);
            EXPECT_LE(std::sqrt(diff), 1e-8 * plss::norm2(p) * a_scale);
        };
        plss::detail::plss_a_core(op, b, zeros(n), opt);
    }
    {
        auto op = plss::make_operator(a);
        opt.state_observer = [&](std::size_t, std::span<const double> p,
                                 std::span<const double> u) {
            // u tracks A^{-1} p, so A u = p.
            const auto au = a.multiply(u);
            double diff = 0.0;
            for (std::size_t i = 0; i < n; ++i) diff += (au[i] - p[i]) * (au[i] - p[i]);
            EXPECT_LE(std::sqrt(diff), 1e-8 * plss::norm2(p));
        };
        plss::detail::plss_spd_inverse_weight_core(op, b, zeros(n), opt);
    }
}

TEST(Breakdown, GuardTriggersRestartAndStillConverges) {
    const auto dense = pt::spd_matrix(8, 10.0, 3);
    const auto a = pt::csr_from_dense(dense);
    const auto b = a.multiply(std::vector<double>(8, 1.0));

    SolverConfig cfg = tight_config(400, 1e-8);
    cfg.breakdown_guard = 1e9;  // every beta denominator trips the guard
    cfg.restart_on_breakdown = true;
    const auto rep = plss::plss_a(a, b, zeros(8), cfg);
    EXPECT_EQ(rep.status, SolveStatus::Converged);

    SolverConfig hard = cfg;
    hard.restart_on_breakdown = false;
    const auto broken = plss::plss_a(a, b, zeros(8), hard);
    EXPECT_EQ(broken.status, SolveStatus::Breakdown);
}

TEST(Breakdown, ExactUnitRatioTripsTheGuard) {
    // theta * phi / omega^2 = 1 makes the beta denominator exactly zero.
    const double theta = 2.0, phi = 8.0, omega = 4.0;
    const double denom = theta * phi / (omega * omega) - 1.0;
    EXPECT_LT(std::abs(denom), SolverConfig{}.breakdown_guard);
}

TEST(Stagnation, InconsistentSingularSystemStops) {
    const auto a = SparseMatrixCSR::from_triplets(2, 2, std::vector<plss::Triplet>{{0, 0, 1}});
    const std::vector<double> b{1, 1};
    SolverConfig cfg = tight_config(1000, 1e-10);
    const auto rep = plss::plss_identity(a, b, zeros(2), cfg);
    EXPECT_EQ(rep.status, SolveStatus::Stagnation);
    EXPECT_LT(rep.iterations, 1000u);
}

TEST(PlssNested, ExactInnerSolveConvergesInOneOuterIteration) {
    const auto a = pt::csr_2x2(4, 1, 1, 3);
    const std::vector<double> b{1, 2};
    SolverConfig cfg = tight_config(10, 1e-8);
    const auto rep = plss::plss_nested(a, b, zeros(2), cfg, 1000, 1e-14);
    EXPECT_EQ(rep.status, SolveStatus::Converged);
    EXPECT_EQ(rep.iterations, 1u);
}

TEST(PlssNested, UpperTriangularHandCase) {
    const auto a = pt::csr_2x2(1, 2, 0, 1);
    const std::vector<double> b{3, 1};
    const auto rep = plss::plss_nested(a, b, zeros(2), tight_config(10, 1e-8));
    EXPECT_EQ(rep.status, SolveStatus::Converged);
    EXPECT_LE(rep.iterations, 3u);
    EXPECT_NEAR(rep.final_x[0], 1.0, 1e-6);
    EXPECT_NEAR(rep.final_x[1], 1.0, 1e-6);
}

TEST(PlssNested, InnerToleranceSchedule) {
    EXPECT_DOUBLE_EQ(plss::nested_inner_tolerance(1, 123.0, 0.5), 0.5);
    EXPECT_DOUBLE_EQ(plss::nested_inner_tolerance(2, 0.9, 0.5), 0.9);
    EXPECT_DOUBLE_EQ(plss::nested_inner_tolerance(4, 0.9, 0.5), 0.3);  // ||r_3|| / 3
}

TEST(PlssNested, SolvesSeededGeneralSystems) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const std::size_t n = 10 + seed * 5;
        const auto a = pt::csr_from_dense(pt::general_matrix(n, 1e3, 400 + seed));
        const auto b = a.multiply(std::vector<double>(n, 1.0));
        SolverConfig cfg = tight_config(10, 1e-6);
        const auto rep = plss::plss_nested(a, b, zeros(n), cfg);
        EXPECT_EQ(rep.status, SolveStatus::Converged) << "seed " << seed;
        EXPECT_LE(pt::relative_residual(a, b, rep.final_x), 1e-6);
    }
}

TEST(LeastSquares, MeanOfTwoObservations) {
    const auto a = SparseMatrixCSR::from_triplets(
        2, 1, std::vector<plss::Triplet>{{0, 0, 1}, {1, 0, 1}});
    const auto rep = plss::least_squares_solve(a, std::vector<double>{1, 3}, zeros(1),
                                               tight_config(10, 1e-10));
    EXPECT_EQ(rep.status, SolveStatus::Converged);
    EXPECT_NEAR(rep.final_x[0], 2.0, 1e-10);
    EXPECT_LE(rep.final_relative_residual(), 1e-10);  // normal-equations residual
    ASSERT_EQ(rep.aux_residual_history.size(), 1u);
    // Original residual ||b - A x|| / ||b|| = sqrt(2) / sqrt(10).
    EXPECT_NEAR(rep.aux_residual_history[0], std::sqrt(2.0 / 10.0), 1e-10);
}

TEST(LeastSquares, ConsistentOverdeterminedSystemIsSolvedExactly) {
    const std::size_t m = 12, n = 5;
    const auto a = pt::random_sparse(m, n, 0.8, 17);
    plss::CounterRng rng(3);
    const auto x_true = pt::random_vector(n, rng);
    const auto b = a.multiply(x_true);
    const auto rep = plss::least_squares_solve(a, b, zeros(n), tight_config(50, 1e-12));
    EXPECT_EQ(rep.status, SolveStatus::Converged);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(rep.final_x[i], x_true[i], 1e-8);
}

TEST(LeastSquares, TwoProductsPerOuterIteration) {
    const std::size_t m = 10, n = 4;
    const auto a = pt::random_sparse(m, n, 0.9, 23);
    plss::CounterRng rng(5);
    const auto b = pt::random_vector(m, rng);

    std::vector<std::uint64_t> totals;
    for (std::size_t j : {3u, 6u}) {
        SpyCounts counts;
        auto op = spy_operator(a, counts);
        const auto rep = plss::least_squares_solve(op, b, zeros(n), tight_config(j, 1e-300));
        EXPECT_EQ(rep.iterations, j);
        totals.push_back(counts.total());
    }
    // Three extra iterations cost exactly 3 * 2 operator applications.
    EXPECT_EQ(totals[1] - totals[0], 6u);
}

TEST(CgReference, HandValuesAndIdentity) {
    const auto a = pt::csr_2x2(4, 1, 1, 3);
    const auto rep = plss::cg_reference(a, std::vector<double>{1, 2}, zeros(2),
                                        tight_config(10, 1e-12));
    EXPECT_EQ(rep.status, SolveStatus::Converged);
    EXPECT_LE(rep.iterations, 2u);
    EXPECT_NEAR(rep.final_x[0], 1.0 / 11.0, 1e-10);
    EXPECT_NEAR(rep.final_x[1], 7.0 / 11.0, 1e-10);

    const auto eye = pt::csr_from_dense(DenseMatrix::identity(3));
    const auto id_rep = plss::cg_reference(eye, std::vector<double>{1, 2, 3}, zeros(3),
                                           tight_config(6));
    EXPECT_EQ(id_rep.iterations, 1u);
}

TEST(CgReference, OneMatvecPerIteration) {
    const auto a = pt::csr_from_dense(pt::spd_matrix(9, 1e2, 13));
    const auto b = a.multiply(std::vector<double>(9, 1.0));
    SpyCounts counts;
    auto op = spy_operator(a, counts);
    const auto rep = plss::cg_reference(op, b, zeros(9), tight_config(4, 1e-300));
    EXPECT_EQ(rep.iterations, 4u);
    EXPECT_EQ(counts.apply, 6u);  // r_0, four A p, exit recompute
}

TEST(CgReference, IndefiniteMatrixReportsBreakdown) {
    // diag(1, -1) makes p^T A p <= 0 reachable.
    const auto a = pt::csr_2x2(1, 0, 0, -1);
    const auto rep = plss::cg_reference(a, std::vector<double>{0, 1}, zeros(2), tight_config(10));
    EXPECT_EQ(rep.status, SolveStatus::Breakdown);
}

TEST(CgEquivalence, ResidualNormsMatchBEqualsA) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const std::size_t n = 20;
        const auto a = pt::csr_from_dense(pt::spd_matrix(n, 1e3, 500 + seed));
        const auto b = a.multiply(std::vector<double>(n, 1.0));
        SolverConfig cfg = tight_config(15, 1e-300);
        cfg.restart_on_breakdown = false;
        const auto ra = plss::plss_a(a, b, zeros(n), cfg);
        const auto rc = plss::cg_reference(a, b, zeros(n), cfg);
        const std::size_t upto =
            std::min({ra.residual_history.size(), rc.residual_history.size(), std::size_t{16}});
        for (std::size_t k = 0; k < upto; ++k) {
            if (ra.residual_history[k] < 1e-10) break;  // below comparison noise
            EXPECT_NEAR(ra.residual_history[k], rc.residual_history[k],
                        1e-6 * rc.residual_history[k])
                << "seed " << seed << " k " << k;
        }
    }
}

TEST(SketchProjectExplicit, ResidualSketchMatchesRecurrence) {
    const std::size_t n = 10;
    const auto a = pt::csr_from_dense(pt::general_matrix(n, 1e2, 61));
    const auto b = a.multiply(std::vector<double>(n, 1.0));
    SolverConfig cfg = tight_config(8, 1e-300);
    cfg.collect_iterates = true;

    const auto recurrence = plss::plss_identity(a, b, zeros(n), cfg);
    plss::SketchSpec spec;
    spec.variant = plss::SketchVariant::ResidualHistory;
    const auto explicit_run = plss::sketch_project_explicit(a, b, zeros(n), cfg, spec);

    const std::size_t upto = std::min({recurrence.iterates.size(), explicit_run.iterates.size(),
                                       std::size_t{9}});
    ASSERT_GE(upto, 5u);
    for (std::size_t k = 0; k < upto; ++k) {
        const double scale = plss::norm2(recurrence.iterates[k]);
        for (std::size_t i = 0; i < n; ++i)
            EXPECT_NEAR(explicit_run.iterates[k][i], recurrence.iterates[k][i],
                        1e-8 * (scale + 1.0))
                << "k " << k;
    }
}

TEST(SketchProjectExplicit, FullRankSquareSketchConvergesInOneIteration) {
    const std::size_t n = 6;
    const auto a = pt::csr_from_dense(pt::general_matrix(n, 50.0, 71));
    const auto b = a.multiply(std::vector<double>(n, 1.0));
    plss::SketchSpec spec;
    spec.variant = plss::SketchVariant::RandomNormal;
    spec.rank = n;
    spec.seed = 5;
    const auto rep = plss::sketch_project_explicit(a, b, zeros(n), tight_config(10, 1e-8), spec);
    EXPECT_EQ(rep.status, SolveStatus::Converged);
    EXPECT_EQ(rep.iterations, 1u);
}

TEST(SketchProjectExplicit, SmallRandomSketchIsSlowerThanBEqualsA) {
    const std::size_t n = 10;
    const auto dense = pt::spd_matrix(n, 1e3, 91);
    const auto a = pt::csr_from_dense(dense);
    const auto b = a.multiply(std::vector<double>(n, 1.0));
    SolverConfig cfg = tight_config(10, 1e-300);
    cfg.restart_on_breakdown = false;

    const auto fast = plss::plss_a(a, b, zeros(n), cfg);
    plss::SketchSpec spec;
    spec.variant = plss::SketchVariant::RandomNormal;
    spec.rank = 5;
    spec.seed = 17;
    const auto slow = plss::sketch_project_explicit(a, b, zeros(n), cfg, spec);

    ASSERT_EQ(fast.residual_history.size(), 11u);
    ASSERT_EQ(slow.residual_history.size(), 11u);
    EXPECT_LE(fast.residual_history[10], 1e-10);
    EXPECT_GE(slow.residual_history[10], 10.0 * fast.residual_history[10]);
}
