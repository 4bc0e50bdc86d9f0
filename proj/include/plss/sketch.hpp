#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "plss/dense.hpp"
#include "plss/operators.hpp"
#include "plss/random.hpp"

namespace plss {

enum class SketchVariant {
    RandomNormal,     ///< fresh standard-normal columns
    ResidualHistory,  ///< s_k = r_{k-1}
    IdentityColumns,  ///< s_k = e_{i_k}, sampled row index
    MatrixColumns,    ///< s_k = a_{i_k}, sampled matrix column
};

enum class IndexSampling { Uniform, NormSquared };

struct SketchSpec {
    SketchVariant variant = SketchVariant::ResidualHistory;
    std::size_t rank = 1;  ///< RandomNormal block width
    IndexSampling sampling = IndexSampling::Uniform;
    std::uint64_t seed = 0;
};

/// m x r matrix of independent standard normal variates; identical for
/// identical (m, r, seed).
inline DenseMatrix gaussian_sketch(std::size_t m, std::size_t r, std::uint64_t seed) {
    if (m == 0 || r == 0) throw std::invalid_argument("gaussian_sketch: empty shape");
    CounterRng rng(seed);
    DenseMatrix s(m, r);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < r; ++j) s(i, j) = rng.next_normal();
    return s;
}

/// One appended sketch column: a sampled index for the implicit variants,
/// or a pointer into the state's materialized storage.
struct SketchColumn {
    std::optional<std::size_t> index;
    const std::vector<double>* dense = nullptr;
};

/// Growing sketch S_k = [s_1 | ... | s_k]. Identity- and matrix-column
/// sketches record indices; the other variants store columns of length m.
class SketchState {
public:
    /// index_weights: per-row (IdentityColumns) or per-column (MatrixColumns)
    /// weights for NormSquared sampling; ignored for Uniform. index_range is
    /// the sampled index space (defaults to m when 0).
    SketchState(const SketchSpec& spec, std::size_t m, std::size_t index_range = 0,
                std::vector<double> index_weights = {})
        : m_(m), rng_(spec.seed) {
        if (spec.variant == SketchVariant::IdentityColumns ||
            spec.variant == SketchVariant::MatrixColumns) {
            if (spec.sampling == IndexSampling::NormSquared) {
                double total = 0.0;
                for (double w : index_weights) total += w;
                if (!(total > 0.0)) throw std::invalid_argument("zero matrix");
                sampler_ = DiscreteSampler::weighted(index_weights);
            } else {
                sampler_ = DiscreteSampler::uniform(index_range == 0 ? m : index_range);
            }
        }
    }

    std::size_t size() const { return k_; }
    std::size_t m() const { return m_; }
    const std::vector<std::size_t>& indices() const { return indices_; }
    const std::vector<std::vector<double>>& stored_columns() const { return columns_; }

    /// Materialize S_k as a dense m x k matrix (index sketches expand to
    /// identity columns).
    DenseMatrix materialized() const {
        DenseMatrix s(m_, k_);
        if (!columns_.empty()) {
            for (std::size_t j = 0; j < k_; ++j)
                for (std::size_t i = 0; i < m_; ++i) s(i, j) = columns_[j][i];
        } else {
            for (std::size_t j = 0; j < indices_.size(); ++j) s(indices_[j], j) = 1.0;
        }
        return s;
    }

    CounterRng& rng() { return rng_; }

    SketchColumn append_dense(std::vector<double> column) {
        columns_.push_back(std::move(column));
        ++k_;
        return SketchColumn{std::nullopt, &columns_.back()};
    }

    SketchColumn append_index(std::size_t index) {
        indices_.push_back(index);
        ++k_;
        return SketchColumn{index, nullptr};
    }

    SketchColumn append_index_with_column(std::size_t index, std::vector<double> column) {
        indices_.push_back(index);
        columns_.push_back(std::move(column));
        ++k_;
        return SketchColumn{index, &columns_.back()};
    }

    std::size_t sample_index() { return sampler_ ? sampler_->sample(rng_) : rng_.next_index(m_); }

    /// Drop the most recent column (sketch resampling after a singular Gram
    /// system).
    void pop_last() {
        if (k_ == 0) return;
        --k_;
        if (!columns_.empty() && columns_.size() > k_) columns_.pop_back();
        if (!indices_.empty() && indices_.size() > k_) indices_.pop_back();
    }

private:
    std::size_t m_;
    std::size_t k_ = 0;
    CounterRng rng_;
    std::optional<DiscreteSampler> sampler_;
    std::vector<std::vector<double>> columns_;
    std::vector<std::size_t> indices_;
};

/// Append the next column of the growing sketch. The residual is required
/// for ResidualHistory; the operator is required for MatrixColumns.
inline SketchColumn next_sketch_column(const SketchSpec& spec, SketchState& state,
                                       std::span<const double> residual = {},
                                       LinearOperator* a = nullptr) {
    switch (spec.variant) {
        case SketchVariant::ResidualHistory: {
            if (residual.size() != state.m())
                throw std::invalid_argument("residual sketch column needs a length-m residual");
            return state.append_dense(std::vector<double>(residual.begin(), residual.end()));
        }
        case SketchVariant::RandomNormal: {
            std::vector<double> col(state.m());
            for (double& v : col) v = state.rng().next_normal();
            return state.append_dense(std::move(col));
        }
        case SketchVariant::IdentityColumns:
            return state.append_index(state.sample_index());
        case SketchVariant::MatrixColumns: {
            if (a == nullptr)
                throw std::invalid_argument("matrix-column sketch needs the operator");
            const std::size_t j = state.sample_index();
            std::vector<double> unit(a->ncols(), 0.0);
            unit[j] = 1.0;
            return state.append_index_with_column(j, a->apply(unit));
        }
    }
    throw std::logic_error("unknown sketch variant");
}

}  // namespace plss
