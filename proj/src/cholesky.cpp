#include "nskrr/cholesky.hpp"

#include <algorithm>
#include <cmath>

#include "nskrr/errors.hpp"
#include "nskrr/simd.hpp"

namespace nskrr {
namespace {

// Rows factored together so each finished row of L is streamed once per block.
constexpr std::size_t kBlockRows = 24;

}  // namespace

std::optional<PackedCholesky> PackedCholesky::factor(std::size_t n, const RowFn& row,
                                                     double shift) {
  PackedCholesky c;
  c.n_ = n;
  c.data_.assign(n * (n + 1) / 2, 0.0);
  const auto& k = simd::active();
  double* L = c.data_.data();

  for (std::size_t i0 = 0; i0 < n; i0 += kBlockRows) {
    const std::size_t i1 = std::min(n, i0 + kBlockRows);
    for (std::size_t i = i0; i < i1; ++i) {
      row(i, std::span<double>(L + offset(i), i + 1));
      L[offset(i) + i] += shift;
    }
    for (std::size_t j = 0; j < i0; ++j) {
      const double* lj = L + offset(j);
      const double inv = 1.0 / lj[j];
      for (std::size_t i = i0; i < i1; ++i) {
        double* li = L + offset(i);
        li[j] = (li[j] - k.dot(li, lj, j)) * inv;
      }
    }
    for (std::size_t i = i0; i < i1; ++i) {
      double* li = L + offset(i);
      for (std::size_t j = i0; j < i; ++j) {
        const double* lj = L + offset(j);
        li[j] = (li[j] - k.dot(li, lj, j)) / lj[j];
      }
      const double d = li[i] - k.dot(li, li, i);
      if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
      li[i] = std::sqrt(d);
    }
  }
  return c;
}

bool PackedCholesky::append(std::span<const double> a) {
  if (a.size() != n_ + 1) throw ArgumentError("PackedCholesky::append: row must have n+1 entries");
  const std::size_t start = data_.size();
  data_.insert(data_.end(), a.begin(), a.end());
  double* l = data_.data() + start;
  const auto& k = simd::active();
  for (std::size_t j = 0; j < n_; ++j) {
    const double* lj = data_.data() + offset(j);
    l[j] = (l[j] - k.dot(lj, l, j)) / lj[j];
  }
  const double d = l[n_] - k.dot(l, l, n_);
  if (!(d > 0.0) || !std::isfinite(d)) {
    data_.resize(start);
    return false;
  }
  l[n_] = std::sqrt(d);
  ++n_;
  return true;
}

void PackedCholesky::solve_lower(std::span<double> b) const {
  if (b.size() != n_) throw ArgumentError("PackedCholesky: rhs size mismatch");
  const auto& k = simd::active();
  for (std::size_t i = 0; i < n_; ++i) {
    const double* li = data_.data() + offset(i);
    b[i] = (b[i] - k.dot(li, b.data(), i)) / li[i];
  }
}

void PackedCholesky::solve_upper(std::span<double> b) const {
  if (b.size() != n_) throw ArgumentError("PackedCholesky: rhs size mismatch");
  // Column-oriented back substitution: row i of L is column i of L^T.
  const auto& k = simd::active();
  for (std::size_t i = n_; i-- > 0;) {
    const double* li = data_.data() + offset(i);
    b[i] /= li[i];
    k.axpy(-b[i], li, b.data(), i);
  }
}

void PackedCholesky::solve(std::span<double> b) const {
  solve_lower(b);
  solve_upper(b);
}

JitteredFactor factor_with_jitter(std::size_t n, const PackedCholesky::RowFn& row, double shift,
                                  double max_diag) {
  if (n == 0) throw ArgumentError("factor_with_jitter: empty matrix");
  if (auto f = PackedCholesky::factor(n, row, shift)) return {std::move(*f), 0.0};
  const double scale = max_diag > 0.0 ? max_diag : 1.0;
  for (double rel = 1e-12; rel <= 1e-6 * (1.0 + 1e-9); rel *= 10.0) {
    const double jitter = rel * scale;
    if (auto f = PackedCholesky::factor(n, row, shift + jitter)) return {std::move(*f), jitter};
  }
  throw NumericError("Cholesky factorization failed after jitter escalation to 1e-6 * max diagonal");
}

JitteredFactor cholesky(const GramMatrix& g) {
  const auto row = [&g](std::size_t i, std::span<double> out) {
    const auto r = g.row(i);
    std::copy_n(r.begin(), i + 1, out.begin());
  };
  return factor_with_jitter(g.size(), row, g.jitter(), g.max_diagonal());
}

}  // namespace nskrr
