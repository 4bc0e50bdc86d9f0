#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "plss/csr.hpp"
#include "plss/dense.hpp"

namespace plss {

/// Matrix-free linear map with matvec accounting. Every apply() bumps
/// matvec_count by one and every apply_transpose() bumps
/// transpose_matvec_count by one. Counters are not synchronized: a solver
/// run owns its operator exclusively.
class LinearOperator {
public:
    using ApplyFn = std::function<void(std::span<const double>, std::span<double>)>;

    LinearOperator(std::size_t nrows, std::size_t ncols, ApplyFn apply, ApplyFn apply_transpose)
        : nrows_(nrows),
          ncols_(ncols),
          apply_(std::move(apply)),
          apply_transpose_(std::move(apply_transpose)) {}

    std::size_t nrows() const { return nrows_; }
    std::size_t ncols() const { return ncols_; }

    void apply(std::span<const double> x, std::span<double> y) {
        if (x.size() != ncols_ || y.size() != nrows_)
            throw std::invalid_argument("operator apply dimension mismatch");
        apply_(x, y);
        ++matvec_count_;
    }

    void apply_transpose(std::span<const double> r, std::span<double> y) {
        if (r.size() != nrows_ || y.size() != ncols_)
            throw std::invalid_argument("operator transpose apply dimension mismatch");
        apply_transpose_(r, y);
        ++transpose_matvec_count_;
    }

    std::vector<double> apply(std::span<const double> x) {
        std::vector<double> y(nrows_);
        apply(x, y);
        return y;
    }

    std::vector<double> apply_transpose(std::span<const double> r) {
        std::vector<double> y(ncols_);
        apply_transpose(r, y);
        return y;
    }

    std::uint64_t matvec_count() const { return matvec_count_; }
    std::uint64_t transpose_matvec_count() const { return transpose_matvec_count_; }

private:
    std::size_t nrows_;
    std::size_t ncols_;
    ApplyFn apply_;
    ApplyFn apply_transpose_;
    std::uint64_t matvec_count_ = 0;
    std::uint64_t transpose_matvec_count_ = 0;
};

/// Wrap a CSR matrix by reference; the matrix must outlive the operator.
inline LinearOperator make_operator(const SparseMatrixCSR& a) {
    return LinearOperator(
        a.nrows(), a.ncols(),
        [&a](std::span<const double> x, std::span<double> y) { a.multiply(x, y); },
        [&a](std::span<const double> r, std::span<double> y) { a.multiply_transpose(r, y); });
}

inline LinearOperator make_operator(const DenseMatrix& a) {
    return LinearOperator(
        a.nrows(), a.ncols(),
        [&a](std::span<const double> x, std::span<double> y) {
            const auto v = a.multiply(x);
            std::copy(v.begin(), v.end(), y.begin());
        },
        [&a](std::span<const double> r, std::span<double> y) {
            const auto v = a.multiply_transpose(r);
            std::copy(v.begin(), v.end(), y.begin());
        });
}

/// Symmetric ncols x ncols operator r -> A^T (A r). Each apply performs one
/// matvec and one transpose matvec on the underlying operator, so its
/// counters advance by two per application. The wrapped operator must
/// outlive the result.
inline LinearOperator normal_equations_operator(LinearOperator& a) {
    const std::size_t n = a.ncols();
    auto step = [&a](std::span<const double> x, std::span<double> y) {
        std::vector<double> mid(a.nrows());
        a.apply(x, mid);
        a.apply_transpose(mid, y);
    };
    return LinearOperator(n, n, step, step);
}

}  // namespace plss
