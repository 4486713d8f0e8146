#include "nskrr/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nskrr/errors.hpp"
#include "nskrr/simd.hpp"

namespace nskrr {
namespace {

void check_domain(const Interval& d) {
  if (!(std::isfinite(d.lo) && std::isfinite(d.hi) && d.lo < d.hi)) {
    throw ArgumentError("kernel domain must be a finite interval with lo < hi");
  }
}

void check_in_domain(const Kernel& k, double x) {
  if (!k.domain().contains(x)) {
    std::ostringstream os;
    os << "point " << x << " outside kernel domain [" << k.domain().lo << ", " << k.domain().hi
       << "]";
    throw DomainError(os.str());
  }
}

}  // namespace

Kernel Kernel::gaussian(double width, Interval domain) {
  if (!(width > 0.0) || !std::isfinite(width)) throw ArgumentError("gaussian width must be > 0");
  check_domain(domain);
  return Kernel(GaussianFamily{width}, domain);
}

Kernel Kernel::spline(int order, Interval domain) {
  if (order != 1 && order != 2) throw ArgumentError("spline order must be 1 or 2");
  check_domain(domain);
  return Kernel(SplineFamily{order}, domain);
}

Kernel Kernel::periodic(double period, int harmonics, Interval domain) {
  if (!(period > 0.0) || !std::isfinite(period)) throw ArgumentError("period must be > 0");
  if (harmonics < 1) throw ArgumentError("harmonics must be >= 1");
  check_domain(domain);
  return Kernel(PeriodicFamily{period, harmonics}, domain);
}

std::string_view Kernel::family_name() const noexcept {
  switch (family_.index()) {
    case 0:
      return "gaussian";
    case 1:
      return "spline";
    default:
      return "periodic";
  }
}

double Kernel::operator()(double x, double a) const noexcept {
  if (const auto* g = std::get_if<GaussianFamily>(&family_)) {
    const double z = (x - a) / g->width;
    return std::exp(-(z * z));
  }
  if (const auto* s = std::get_if<SplineFamily>(&family_)) {
    const double len = domain_.length();
    const double u = (x - domain_.lo) / len;
    const double v = (a - domain_.lo) / len;
    const double m = std::min(u, v);
    if (s->order == 1) return 1.0 + m;
    const double big = std::max(u, v);
    return 1.0 + u * v + m * m * (3.0 * big - m) / 6.0;
  }
  const auto& p = std::get<PeriodicFamily>(family_);
  const double phase = 2.0 * std::numbers::pi * (x - a) / p.period;
  double s = 1.0;
  for (int k = 1; k <= p.harmonics; ++k) s += std::cos(k * phase) / (double(k) * k);
  return s;
}

double eval(const Kernel& k, double x, double a) {
  check_in_domain(k, x);
  check_in_domain(k, a);
  return k(x, a);
}

void eval_row(const Kernel& k, double x, std::span<const double> points, std::span<double> out) {
  if (points.size() != out.size()) throw ArgumentError("eval_row: length mismatch");
  if (const auto* g = std::get_if<GaussianFamily>(&k.family())) {
    simd::gaussian_row(x, points, 1.0 / g->width, out);
    return;
  }
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = k(x, points[i]);
}

double weighted_sum(const Kernel& k, double x, std::span<const double> points,
                    std::span<const double> weights) {
  if (points.size() != weights.size()) throw ArgumentError("weighted_sum: length mismatch");
  if (const auto* g = std::get_if<GaussianFamily>(&k.family())) {
    return simd::gaussian_weighted_sum(x, points, weights, 1.0 / g->width);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) s += weights[i] * k(points[i], x);
  return s;
}

GramMatrix::GramMatrix(std::vector<double> points, std::vector<double> entries, double jitter)
    : points_(std::move(points)), entries_(std::move(entries)), jitter_(jitter) {
  if (entries_.size() != points_.size() * points_.size()) {
    throw ArgumentError("GramMatrix: entries must be |points|^2");
  }
  if (jitter_ < 0.0) throw ArgumentError("GramMatrix: jitter must be >= 0");
}

double GramMatrix::max_diagonal() const noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) m = std::max(m, (*this)(i, i));
  return m;
}

double GramMatrix::trace() const noexcept {
  double t = 0.0;
  for (std::size_t i = 0; i < size(); ++i) t += (*this)(i, i);
  return t;
}

GramMatrix GramMatrix::with_jitter(double jitter) const { return GramMatrix(points_, entries_, jitter); }

GramMatrix gram(const Kernel& k, std::span<const double> points) {
  if (points.empty()) throw ArgumentError("gram: empty point list");
  for (double p : points) check_in_domain(k, p);
  const std::size_t n = points.size();
  std::vector<double> e(n * n);
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Upper triangle only, then mirrored, so the result is exactly symmetric.
    eval_row(k, points[i], points.subspan(i), std::span(row).first(n - i));
    for (std::size_t j = i; j < n; ++j) {
      e[i * n + j] = row[j - i];
      e[j * n + i] = row[j - i];
    }
  }
  return GramMatrix(std::vector<double>(points.begin(), points.end()), std::move(e));
}

double rkhs_norm_sq(const GramMatrix& g, std::span<const double> coeffs) {
  if (coeffs.size() != g.size()) throw ArgumentError("rkhs_norm_sq: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += coeffs[i] * simd::dot(g.row(i), coeffs);
  return std::max(s, 0.0);
}

}  // namespace nskrr
