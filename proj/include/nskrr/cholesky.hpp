#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nskrr/kernels.hpp"

namespace nskrr {

// Lower Cholesky factor L of a symmetric positive definite matrix, stored
// packed by rows: row i occupies i+1 contiguous doubles. Appending a bordered
// row/column is an O(n^2) forward solve plus an amortised O(n) push_back.
class PackedCholesky {
 public:
  // Fills row i of the matrix being factored, columns 0..i (span length i+1).
  using RowFn = std::function<void(std::size_t i, std::span<double> row)>;

  PackedCholesky() = default;

  // Factors A + shift I. Returns nullopt on a non-positive pivot.
  static std::optional<PackedCholesky> factor(std::size_t n, const RowFn& row, double shift);

  std::size_t size() const noexcept { return n_; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + offset(i), i + 1};
  }
  double diag(std::size_t i) const noexcept { return data_[offset(i) + i]; }

  // Borders the factor with one row of the matrix: `a` holds the new row's
  // off-diagonal entries a[0..n-1] followed by its (already shifted) diagonal
  // a[n]. Returns false, leaving the factor unchanged, on a non-positive pivot.
  bool append(std::span<const double> a);

  // In place: b <- L^{-1} b, b <- L^{-T} b, b <- (L L^T)^{-1} b.
  void solve_lower(std::span<double> b) const;
  void solve_upper(std::span<double> b) const;
  void solve(std::span<double> b) const;

  void reserve(std::size_t n) { data_.reserve(n * (n + 1) / 2); }

 private:
  static std::size_t offset(std::size_t i) noexcept { return i * (i + 1) / 2; }
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct JitteredFactor {
  PackedCholesky factor;
  double jitter = 0.0;  // added on top of `shift`
};

// Factors A + (shift + jitter) I, escalating jitter over
// {0, 1e-12, 1e-11, ..., 1e-6} * max_diag. Throws NumericError when every rung fails.
JitteredFactor factor_with_jitter(std::size_t n, const PackedCholesky::RowFn& row, double shift,
                                  double max_diag);

// Factorization of a Gram matrix under the same ladder; the returned jitter is
// the smallest rung that succeeded.
JitteredFactor cholesky(const GramMatrix& g);

}  // namespace nskrr
