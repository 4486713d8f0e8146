#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace nskrr {

// Closed interval [lo, hi] on the real line.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
  double length() const noexcept { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// exp(-((x - a) / width)^2)
struct GaussianFamily {
  double width = 1.0;
  friend bool operator==(const GaussianFamily&, const GaussianFamily&) = default;
};

// Spline kernels on s = (x - lo) / (hi - lo):
//   order 1: 1 + min(s, t)
//   order 2: 1 + s t + m^2 (3M - m) / 6,  m = min(s, t), M = max(s, t)
struct SplineFamily {
  int order = 2;
  friend bool operator==(const SplineFamily&, const SplineFamily&) = default;
};

// 1 + sum_{k=1}^{harmonics} cos(2 pi k (x - a) / period) / k^2
struct PeriodicFamily {
  double period = 1.0;
  int harmonics = 1;
  friend bool operator==(const PeriodicFamily&, const PeriodicFamily&) = default;
};

class Kernel {
 public:
  using Family = std::variant<GaussianFamily, SplineFamily, PeriodicFamily>;

  static Kernel gaussian(double width, Interval domain);
  static Kernel spline(int order, Interval domain);
  static Kernel periodic(double period, int harmonics, Interval domain);

  const Family& family() const noexcept { return family_; }
  const Interval& domain() const noexcept { return domain_; }
  std::string_view family_name() const noexcept;
  bool is_gaussian() const noexcept { return std::holds_alternative<GaussianFamily>(family_); }

  // No domain check; callers that take user input go through eval().
  double operator()(double x, double a) const noexcept;

  friend bool operator==(const Kernel&, const Kernel&) = default;

 private:
  Kernel(Family f, Interval d) : family_(f), domain_(d) {}
  Family family_;
  Interval domain_;
};

// K(x, a) with a domain check on both arguments.
double eval(const Kernel& k, double x, double a);

// out[i] = K(x, points[i]). Gaussian kernels take the SIMD path.
void eval_row(const Kernel& k, double x, std::span<const double> points, std::span<double> out);

// sum_i weights[i] K(points[i], x)
double weighted_sum(const Kernel& k, double x, std::span<const double> points,
                    std::span<const double> weights);

class GramMatrix {
 public:
  GramMatrix(std::vector<double> points, std::vector<double> entries, double jitter = 0.0);

  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<double>& points() const noexcept { return points_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * size() + j]; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {entries_.data() + i * size(), size()};
  }
  // Row-major n x n.
  const std::vector<double>& entries() const noexcept { return entries_; }
  double jitter() const noexcept { return jitter_; }
  double max_diagonal() const noexcept;
  double trace() const noexcept;
  GramMatrix with_jitter(double jitter) const;

 private:
  std::vector<double> points_;
  std::vector<double> entries_;
  double jitter_ = 0.0;
};

GramMatrix gram(const Kernel& k, std::span<const double> points);

// c^T G c, clamped at zero when rounding makes it slightly negative.
double rkhs_norm_sq(const GramMatrix& g, std::span<const double> coeffs);

}  // namespace nskrr
