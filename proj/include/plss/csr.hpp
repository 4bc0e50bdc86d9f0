#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace plss {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Compressed sparse row matrix. Rows hold strictly increasing column
/// indices with no duplicates; duplicate triplets are summed at construction.
/// Immutable after construction and safe to share across threads.
class SparseMatrixCSR {
public:
    SparseMatrixCSR() = default;

    static SparseMatrixCSR from_triplets(std::size_t nrows, std::size_t ncols,
                                         std::span<const Triplet> entries) {
        for (std::size_t e = 0; e < entries.size(); ++e) {
            if (entries[e].row >= nrows)
                throw std::invalid_argument("row index out of range at entry " +
                                            std::to_string(e) + ": (" +
                                            std::to_string(entries[e].row) + ", " +
                                            std::to_string(entries[e].col) + ")");
            if (entries[e].col >= ncols)
                throw std::invalid_argument("column index out of range at entry " +
                                            std::to_string(e) + ": (" +
                                            std::to_string(entries[e].row) + ", " +
                                            std::to_string(entries[e].col) + ")");
        }

        SparseMatrixCSR a;
        a.nrows_ = nrows;
        a.ncols_ = ncols;
        a.row_ptr_.assign(nrows + 1, 0);
        for (const Triplet& t : entries) ++a.row_ptr_[t.row + 1];
        std::partial_sum(a.row_ptr_.begin(), a.row_ptr_.end(), a.row_ptr_.begin());

        std::vector<std::size_t> cols(entries.size());
        std::vector<double> vals(entries.size());
        std::vector<std::size_t> next(a.row_ptr_.begin(), a.row_ptr_.end() - 1);
        for (const Triplet& t : entries) {
            const std::size_t k = next[t.row]++;
            cols[k] = t.col;
            vals[k] = t.value;
        }

        // Sort each row by column and sum duplicates in place.
        a.col_idx_.reserve(entries.size());
        a.values_.reserve(entries.size());
        std::vector<std::size_t> order;
        std::vector<std::size_t> compact_ptr(nrows + 1, 0);
        for (std::size_t i = 0; i < nrows; ++i) {
            const std::size_t lo = a.row_ptr_[i], hi = a.row_ptr_[i + 1];
            order.resize(hi - lo);
            std::iota(order.begin(), order.end(), lo);
            std::sort(order.begin(), order.end(),
                      [&cols](std::size_t l, std::size_t r) { return cols[l] < cols[r]; });
            for (std::size_t k : order) {
                if (!a.col_idx_.empty() && a.col_idx_.size() > compact_ptr[i] &&
                    a.col_idx_.back() == cols[k]) {
                    a.values_.back() += vals[k];
                } else {
                    a.col_idx_.push_back(cols[k]);
                    a.values_.push_back(vals[k]);
                }
            }
            compact_ptr[i + 1] = a.col_idx_.size();
        }
        a.row_ptr_ = std::move(compact_ptr);
        return a;
    }

    std::size_t nrows() const { return nrows_; }
    std::size_t ncols() const { return ncols_; }
    std::size_t nnz() const { return values_.size(); }

    const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
    const std::vector<std::size_t>& col_idx() const { return col_idx_; }
    const std::vector<double>& values() const { return values_; }

    std::span<const std::size_t> row_cols(std::size_t i) const {
        return {col_idx_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }
    std::span<const double> row_vals(std::size_t i) const {
        return {values_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const {
        check_dim(x.size(), ncols_, "matvec");
        check_dim(y.size(), nrows_, "matvec");
        for (std::size_t i = 0; i < nrows_; ++i) {
            double sum = 0.0;
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                sum += values_[k] * x[col_idx_[k]];
            y[i] = sum;
        }
    }

    /// y = A^T r, as a scatter pass over the row storage.
    void multiply_transpose(std::span<const double> r, std::span<double> y) const {
        check_dim(r.size(), nrows_, "transpose matvec");
        check_dim(y.size(), ncols_, "transpose matvec");
        std::fill(y.begin(), y.end(), 0.0);
        for (std::size_t i = 0; i < nrows_; ++i) {
            const double ri = r[i];
            if (ri == 0.0) continue;
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                y[col_idx_[k]] += values_[k] * ri;
        }
    }

    std::vector<double> multiply(std::span<const double> x) const {
        std::vector<double> y(nrows_);
        multiply(x, y);
        return y;
    }

    std::vector<double> multiply_transpose(std::span<const double> r) const {
        std::vector<double> y(ncols_);
        multiply_transpose(r, y);
        return y;
    }

    /// a_{i*} x over the stored pattern of row i.
    double row_dot(std::size_t i, std::span<const double> x) const {
        double sum = 0.0;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            sum += values_[k] * x[col_idx_[k]];
        return sum;
    }

    double row_norm_squared(std::size_t i) const {
        double sum = 0.0;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            sum += values_[k] * values_[k];
        return sum;
    }

    std::vector<double> row_norms_squared() const {
        std::vector<double> out(nrows_);
        for (std::size_t i = 0; i < nrows_; ++i) out[i] = row_norm_squared(i);
        return out;
    }

    std::vector<double> column_norms() const {
        std::vector<double> out(ncols_, 0.0);
        for (std::size_t k = 0; k < values_.size(); ++k)
            out[col_idx_[k]] += values_[k] * values_[k];
        for (double& v : out) v = std::sqrt(v);
        return out;
    }

    double value_at(std::size_t i, std::size_t j) const {
        const auto cols = row_cols(i);
        const auto it = std::lower_bound(cols.begin(), cols.end(), j);
        if (it == cols.end() || *it != j) return 0.0;
        return values_[row_ptr_[i] + static_cast<std::size_t>(it - cols.begin())];
    }

    /// Exact symmetry of the stored pattern and values.
    bool is_symmetric() const {
        if (nrows_ != ncols_) return false;
        for (std::size_t i = 0; i < nrows_; ++i)
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                if (value_at(col_idx_[k], i) != values_[k]) return false;
        return true;
    }

private:
    static void check_dim(std::size_t got, std::size_t want, const char* what) {
        if (got != want)
            throw std::invalid_argument(std::string(what) + " dimension mismatch: got " +
                                        std::to_string(got) + ", expected " +
                                        std::to_string(want));
    }

    std::size_t nrows_ = 0;
    std::size_t ncols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
};

}  // namespace plss
