#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "plss/kaczmarz.hpp"
#include "support/test_matrices.hpp"

namespace pt = plss::testing;
using plss::DenseMatrix;
using plss::IndexSampling;
using plss::SolveStatus;
using plss::SolverConfig;
using plss::SparseMatrixCSR;
using plss::Triplet;

namespace {

std::vector<double> zeros(std::size_t n) { return std::vector<double>(n, 0.0); }

SolverConfig kz_config(std::size_t maxit, double tol = 1e-10, std::uint64_t seed = 0) {
    SolverConfig cfg;
    cfg.tol = tol;
    cfg.maxit = maxit;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST(RandomizedKaczmarz, SingleRowProjection) {
    // Row [3, 4], b = 10: the projection is p = [1.2, 1.6] and the row
    // equation holds exactly afterwards.
    const auto a = SparseMatrixCSR::from_triplets(
        1, 2, std::vector<Triplet>{{0, 0, 3}, {0, 1, 4}});
    const auto rep = plss::randomized_kaczmarz(a, std::vector<double>{10}, zeros(2),
                                               kz_config(1));
    EXPECT_NEAR(rep.final_x[0], 1.2, 1e-14);
    EXPECT_NEAR(rep.final_x[1], 1.6, 1e-14);
    EXPECT_NEAR(a.row_dot(0, rep.final_x), 10.0, 1e-12);
    EXPECT_EQ(rep.status, SolveStatus::Converged);
}

TEST(RandomizedKaczmarz, PointOnHyperplaneIsFixed) {
    const auto a = SparseMatrixCSR::from_triplets(
        1, 2, std::vector<Triplet>{{0, 0, 3}, {0, 1, 4}});
    const std::vector<double> on_plane{2.0, 1.0};  // 3*2 + 4*1 = 10
    const auto rep = plss::randomized_kaczmarz(a, std::vector<double>{10}, on_plane,
                                               kz_config(1, 1e-14));
    EXPECT_DOUBLE_EQ(rep.final_x[0], 2.0);
    EXPECT_DOUBLE_EQ(rep.final_x[1], 1.0);
}

TEST(RandomizedKaczmarz, IdentityRowsSetCoordinatesExactly) {
    const auto eye = pt::csr_from_dense(DenseMatrix::identity(4));
    const std::vector<double> b{4, 3, 2, 1};
    SolverConfig cfg = kz_config(200, 1e-12, 11);
    cfg.collect_iterates = true;
    const auto rep = plss::randomized_kaczmarz(eye, b, zeros(4), cfg, IndexSampling::Uniform);
    EXPECT_EQ(rep.status, SolveStatus::Converged);
    for (std::size_t k = 1; k < rep.iterates.size(); ++k)
        for (std::size_t i = 0; i < 4; ++i) {
            const double v = rep.iterates[k][i];
            EXPECT_TRUE(v == 0.0 || v == b[i]);  // a coordinate is either unset or exact
        }
}

TEST(RandomizedKaczmarz, SampledRowEquationHoldsAfterEveryStep) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const std::size_t m = 6, n = 4;
        const auto dense = pt::general_matrix(4, 50.0, 600 + seed);
        // Rectangular consistent system from stacked rows of a square one.
        std::vector<Triplet> t;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) t.push_back({i, j, dense(i % 4, j) + (i >= 4)});
        const auto a = SparseMatrixCSR::from_triplets(m, n, t);
        plss::CounterRng xr(seed);
        const auto x_true = pt::random_vector(n, xr);
        const auto b = a.multiply(x_true);

        SolverConfig cfg = kz_config(30, 1e-14, 900 + seed);
        cfg.collect_iterates = true;
        const auto rep = plss::randomized_kaczmarz(a, b, zeros(n), cfg);

        // Replay the sampler: RK draws one row index per iteration.
        auto sampler = plss::DiscreteSampler::weighted(a.row_norms_squared());
        plss::CounterRng rng(900 + seed);
        for (std::size_t k = 1; k < rep.iterates.size(); ++k) {
            const std::size_t row = sampler.sample(rng);
            const double lhs = a.row_dot(row, rep.iterates[k]);
            EXPECT_NEAR(lhs, b[row], 1e-12 * std::max(1.0, std::abs(b[row])))
                << "seed " << seed << " step " << k;
        }
    }
}

TEST(RandomizedKaczmarz, MatvecsComeOnlyFromPeriodicChecks) {
    const auto a = pt::csr_from_dense(pt::spd_matrix(6, 1e2, 40));
    const auto b = a.multiply(std::vector<double>(6, 1.0));
    SolverConfig cfg = kz_config(12, 1e-300, 2);
    cfg.true_residual_check = 5;
    const auto rep = plss::randomized_kaczmarz(a, b, zeros(6), cfg);
    EXPECT_EQ(rep.iterations, 12u);
    // initial residual + checks at k = 5, 10 and the exit check at k = 12
    EXPECT_EQ(rep.matvecs, 4u);
    EXPECT_EQ(rep.transpose_matvecs, 0u);
}

TEST(RandomizedKaczmarz, ConvergesOnSeededConsistentSystem) {
    // Row-action steps contract slowly; the expected rate per step is about
    // sigma_min^2 / ||A||_F^2, so keep the conditioning mild.
    const auto a = pt::csr_from_dense(pt::spd_matrix(4, 3.0, 52));
    const auto b = a.multiply(std::vector<double>(4, 1.0));
    const auto rep = plss::randomized_kaczmarz(a, b, zeros(4), kz_config(2000, 1e-6, 3));
    EXPECT_EQ(rep.status, SolveStatus::Converged);
    EXPECT_LE(pt::relative_residual(a, b, rep.final_x), 1e-6);
}

TEST(PlssKaczmarz, EmptyHistoryReducesToKaczmarzStep) {
    const std::size_t n = 3;
    const auto dense = pt::general_matrix(n, 20.0, 33);
    const auto a = pt::csr_from_dense(dense);
    const auto b = a.multiply(std::vector<double>(n, 1.0));

    SolverConfig cfg = kz_config(1, 1e-14, 7);
    cfg.collect_iterates = true;
    const auto rep = plss::plss_kaczmarz(a, b, zeros(n), cfg);
    ASSERT_EQ(rep.iterates.size(), 2u);

    // With no history and W = I the step is the plain Kaczmarz projection
    // p_1 = ((r_0)_i / ||a_i||^2) a_i^T for the sampled row i.
    bool matched = false;
    for (std::size_t i = 0; i < n && !matched; ++i) {
        std::vector<double> expected(n, 0.0);
        const auto cols = a.row_cols(i);
        const auto vals = a.row_vals(i);
        const double eta = b[i] / a.row_norm_squared(i);
        for (std::size_t j = 0; j < cols.size(); ++j) expected[cols[j]] = eta * vals[j];
        double diff = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            diff = std::max(diff, std::abs(rep.iterates[1][j] - expected[j]));
        if (diff <= 1e-12) {
            matched = true;
            EXPECT_NEAR(a.row_dot(i, rep.iterates[1]), b[i], 1e-12 * std::abs(b[i]));
        }
    }
    EXPECT_TRUE(matched);
}

TEST(PlssKaczmarz, SampledRowsBecomeAndStaySatisfied) {
    const std::size_t n = 5;
    const auto a = pt::csr_from_dense(pt::general_matrix(n, 30.0, 44));
    const auto b = a.multiply(std::vector<double>(n, 1.0));
    SolverConfig cfg = kz_config(n, 1e-13, 21);
    cfg.collect_iterates = true;
    const auto rep = plss::plss_kaczmarz(a, b, zeros(n), cfg);

    std::vector<bool> satisfied(n, false);
    for (std::size_t k = 1; k < rep.iterates.size(); ++k) {
        bool some_row_newly_satisfied = false;
        for (std::size_t i = 0; i < n; ++i) {
            const double after = std::abs(a.row_dot(i, rep.iterates[k]) - b[i]);
            const double scale = std::max(1.0, std::abs(b[i]));
            if (satisfied[i]) {
                // The growing sketch keeps every earlier row equation.
                EXPECT_LE(after, 1e-8 * scale) << "row " << i << " at iteration " << k;
            } else if (after <= 1e-12 * scale) {
                const double before = std::abs(a.row_dot(i, rep.iterates[k - 1]) - b[i]);
                if (before > 1e-8) some_row_newly_satisfied = true;
                satisfied[i] = true;
            }
        }
        EXPECT_TRUE(some_row_newly_satisfied) << "iteration " << k;
    }
}

TEST(PlssKaczmarz, ConvergesOnSeededSystem) {
    const auto a = pt::csr_from_dense(pt::spd_matrix(4, 10.0, 73));
    const auto b = a.multiply(std::vector<double>(4, 1.0));
    const auto rep = plss::plss_kaczmarz(a, b, zeros(4), kz_config(200, 1e-4, 5));
    EXPECT_EQ(rep.status, SolveStatus::Converged);
    EXPECT_LE(rep.final_relative_residual(), 1e-4);
    EXPECT_LT(rep.residual_history.back(), rep.residual_history.front());
    // Full rank reached after at most n accepted rows.
    EXPECT_LE(rep.iterations, 8u);
}

TEST(PlssKaczmarz, AllRowsZeroIsRejected) {
    const auto a = SparseMatrixCSR::from_triplets(2, 2, {});
    EXPECT_THROW(
        plss::plss_kaczmarz(a, std::vector<double>{1, 1}, zeros(2), kz_config(5)),
        std::invalid_argument);
}
