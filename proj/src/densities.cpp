#include "nskrr/densities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/erf.hpp>

#include "nskrr/errors.hpp"
#include "nskrr/random.hpp"

namespace nskrr {
namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

double lower_tail(double z) { return 0.5 * std::erfc(-z / kSqrt2); }
double upper_tail(double z) { return 0.5 * std::erfc(z / kSqrt2); }

// P(a <= Z <= b) for a standard normal, without cancellation in either tail.
double normal_mass(double a, double b) {
  if (a >= 0.0) return upper_tail(a) - upper_tail(b);
  if (b <= 0.0) return lower_tail(b) - lower_tail(a);
  return 1.0 - lower_tail(a) - upper_tail(b);
}

bool same_support(const Interval& a, const Interval& b) {
  const double tol = 1e-12 * std::max({1.0, std::abs(a.lo), std::abs(a.hi)});
  return std::abs(a.lo - b.lo) <= tol && std::abs(a.hi - b.hi) <= tol;
}

double sample_truncated_gaussian(const TruncatedGaussian& g, const Interval& s, double v) {
  const double alpha = (s.lo - g.center) / g.scale;
  const double beta = (s.hi - g.center) / g.scale;
  const double lo_mass = lower_tail(alpha);
  double z = 0.0;
  const double u = lo_mass + v * g.mass;
  if (u <= 0.5) {
    z = -kSqrt2 * boost::math::erfc_inv(2.0 * u);
  } else {
    // Work with the upper-tail mass beyond the quantile to keep precision.
    const double q = upper_tail(beta) + (1.0 - v) * g.mass;
    z = kSqrt2 * boost::math::erfc_inv(2.0 * q);
  }
  z = std::clamp(z, alpha, beta);
  return g.center + g.scale * z;
}

double sample_piecewise(const PiecewiseConstant& p, double v) {
  double acc = 0.0;
  const std::size_t m = p.values.size();
  for (std::size_t k = 0; k < m; ++k) {
    const double width = p.breakpoints[k + 1] - p.breakpoints[k];
    const double mass = p.values[k] * width;
    if (mass > 0.0 && (v < acc + mass || k + 1 == m)) {
      const double x = p.breakpoints[k] + (v - acc) / p.values[k];
      return std::clamp(x, p.breakpoints[k], p.breakpoints[k + 1]);
    }
    acc += mass;
  }
  // Only reachable when trailing segments carry zero mass.
  for (std::size_t k = m; k-- > 0;) {
    if (p.values[k] > 0.0) return p.breakpoints[k + 1];
  }
  return p.breakpoints.back();
}

double sample_exact(const Density& d, rng::UniformStream& u) {
  const Density* cur = &d;
  for (;;) {
    if (const auto* g = std::get_if<TruncatedGaussian>(&cur->kind())) {
      return sample_truncated_gaussian(*g, cur->support(), u.next());
    }
    if (const auto* p = std::get_if<PiecewiseConstant>(&cur->kind())) {
      return sample_piecewise(*p, u.next());
    }
    const auto& mix = std::get<Mixture>(cur->kind());
    const double v = u.next();
    double acc = 0.0;
    std::size_t pick = mix.components.size();
    for (std::size_t k = 0; k < mix.components.size(); ++k) {
      if (mix.weights[k] <= 0.0) continue;
      acc += mix.weights[k];
      pick = k;
      if (v < acc) break;
    }
    cur = &mix.components[pick];
  }
}

}  // namespace

Density Density::truncated_gaussian(double center, double scale, Interval support) {
  if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(center)) {
    throw ArgumentError("truncated_gaussian: scale must be > 0 and center finite");
  }
  if (!(support.lo < support.hi)) throw ArgumentError("truncated_gaussian: empty support");
  const double mass = normal_mass((support.lo - center) / scale, (support.hi - center) / scale);
  if (!(mass > 0.0)) throw ArgumentError("truncated_gaussian: support carries no mass");
  return Density(TruncatedGaussian{center, scale, mass}, support);
}

Density Density::piecewise_constant(std::vector<double> breakpoints, std::vector<double> values) {
  if (breakpoints.size() < 2 || values.size() + 1 != breakpoints.size()) {
    throw ArgumentError("piecewise_constant: need |values| + 1 = |breakpoints| >= 2");
  }
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    if (!(breakpoints[k] < breakpoints[k + 1])) {
      throw ArgumentError("piecewise_constant: breakpoints must be strictly increasing");
    }
  }
  double total = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!(values[k] >= 0.0) || !std::isfinite(values[k])) {
      throw ArgumentError("piecewise_constant: values must be finite and >= 0");
    }
    total += values[k] * (breakpoints[k + 1] - breakpoints[k]);
  }
  if (!(total > 0.0)) throw ArgumentError("piecewise_constant: zero total mass");
  for (double& v : values) v /= total;
  const Interval support{breakpoints.front(), breakpoints.back()};
  return Density(PiecewiseConstant{std::move(breakpoints), std::move(values)}, support);
}

Density Density::uniform(Interval support) {
  return piecewise_constant({support.lo, support.hi}, {1.0});
}

double Density::pdf(double x) const noexcept {
  if (!support_.contains(x)) return 0.0;
  if (const auto* g = std::get_if<TruncatedGaussian>(&kind_)) {
    const double z = (x - g->center) / g->scale;
    return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * g->scale * g->mass);
  }
  if (const auto* p = std::get_if<PiecewiseConstant>(&kind_)) {
    const auto it = std::upper_bound(p->breakpoints.begin(), p->breakpoints.end(), x);
    std::size_t k = static_cast<std::size_t>(it - p->breakpoints.begin());
    k = k == 0 ? 0 : k - 1;
    if (k >= p->values.size()) k = p->values.size() - 1;  // x == hi
    return p->values[k];
  }
  const auto& m = std::get<Mixture>(kind_);
  double s = 0.0;
  for (std::size_t k = 0; k < m.components.size(); ++k) {
    if (m.weights[k] != 0.0) s += m.weights[k] * m.components[k].pdf(x);
  }
  return s;
}

double Density::pdf_left(double x) const noexcept {
  if (x <= support_.lo || x > support_.hi) return 0.0;
  if (const auto* p = std::get_if<PiecewiseConstant>(&kind_)) {
    const auto it = std::lower_bound(p->breakpoints.begin(), p->breakpoints.end(), x);
    const auto k = static_cast<std::size_t>(it - p->breakpoints.begin());
    return p->values[std::min(k, p->values.size()) - 1];
  }
  if (const auto* m = std::get_if<Mixture>(&kind_)) {
    double s = 0.0;
    for (std::size_t k = 0; k < m->components.size(); ++k) {
      if (m->weights[k] != 0.0) s += m->weights[k] * m->components[k].pdf_left(x);
    }
    return s;
  }
  return pdf(x);
}

double Density::pdf_right(double x) const noexcept {
  if (x < support_.lo || x >= support_.hi) return 0.0;
  if (const auto* p = std::get_if<PiecewiseConstant>(&kind_)) {
    return pdf(x);
  }
  if (const auto* m = std::get_if<Mixture>(&kind_)) {
    double s = 0.0;
    for (std::size_t k = 0; k < m->components.size(); ++k) {
      if (m->weights[k] != 0.0) s += m->weights[k] * m->components[k].pdf_right(x);
    }
    return s;
  }
  return pdf(x);
}

double Density::cdf(double x) const noexcept {
  if (x <= support_.lo) return 0.0;
  if (x >= support_.hi) return 1.0;
  if (const auto* g = std::get_if<TruncatedGaussian>(&kind_)) {
    return normal_mass((support_.lo - g->center) / g->scale, (x - g->center) / g->scale) / g->mass;
  }
  if (const auto* p = std::get_if<PiecewiseConstant>(&kind_)) {
    double acc = 0.0;
    for (std::size_t k = 0; k < p->values.size(); ++k) {
      const double a = p->breakpoints[k];
      const double b = p->breakpoints[k + 1];
      if (x < b) return acc + p->values[k] * (x - a);
      acc += p->values[k] * (b - a);
    }
    return 1.0;
  }
  const auto& m = std::get<Mixture>(kind_);
  double s = 0.0;
  for (std::size_t k = 0; k < m.components.size(); ++k) s += m.weights[k] * m.components[k].cdf(x);
  return s;
}

bool Density::non_degenerate() const noexcept {
  if (std::holds_alternative<TruncatedGaussian>(kind_)) return true;
  if (const auto* p = std::get_if<PiecewiseConstant>(&kind_)) {
    return std::all_of(p->values.begin(), p->values.end(), [](double v) { return v > 0.0; });
  }
  const auto& m = std::get<Mixture>(kind_);
  for (std::size_t k = 0; k < m.components.size(); ++k) {
    if (m.weights[k] > 0.0 && m.components[k].non_degenerate()) return true;
  }
  return false;
}

Density convex_combine(std::vector<Density> components, std::vector<double> weights) {
  if (components.empty()) throw ArgumentError("convex_combine: no components");
  if (components.size() != weights.size()) {
    throw ArgumentError("convex_combine: |weights| must equal |components|");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError("convex_combine: weights must be >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ArgumentError("convex_combine: weights must sum to 1");
  const Interval s = components.front().support();
  for (const auto& c : components) {
    if (!same_support(c.support(), s)) throw ArgumentError("convex_combine: supports differ");
  }
  return Density(Mixture{std::move(components), std::move(weights)}, s);
}

double pdf(const Density& d, double x) noexcept { return d.pdf(x); }

SamplingSchedule::SamplingSchedule(std::vector<Phase> phases) : phases_(std::move(phases)) {
  if (phases_.empty()) throw ArgumentError("SamplingSchedule: no phases");
  const Interval s = phases_.front().density.support();
  for (const auto& p : phases_) {
    if (p.count == 0) throw ArgumentError("SamplingSchedule: phase counts must be >= 1");
    if (!same_support(p.density.support(), s)) {
      throw ArgumentError("SamplingSchedule: phase densities must share one support");
    }
    if (!p.density.non_degenerate()) {
      throw ArgumentError("SamplingSchedule: phase density vanishes on part of the support");
    }
    total_ += p.count;
    ends_.push_back(total_);
  }
}

std::size_t SamplingSchedule::phase_of(std::size_t i) const {
  if (i < 1 || i > total_) throw ArgumentError("sample index out of schedule range");
  const auto it = std::lower_bound(ends_.begin(), ends_.end(), i);
  return static_cast<std::size_t>(it - ends_.begin());
}

std::vector<std::size_t> SamplingSchedule::counts_up_to(std::size_t t) const {
  if (t < 1 || t > total_) throw ArgumentError("t out of schedule range");
  std::vector<std::size_t> counts(phases_.size(), 0);
  std::size_t start = 0;
  for (std::size_t k = 0; k < phases_.size(); ++k) {
    if (t > start) counts[k] = std::min(t, ends_[k]) - start;
    start = ends_[k];
  }
  return counts;
}

const Density& density_at(const SamplingSchedule& s, std::size_t i) {
  return s.phases()[s.phase_of(i)].density;
}

Density average_density(const SamplingSchedule& s, std::size_t t) {
  const auto counts = s.counts_up_to(t);
  std::vector<Density> comps;
  std::vector<double> weights;
  comps.reserve(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    comps.push_back(s.phases()[k].density);
    weights.push_back(static_cast<double>(counts[k]) / static_cast<double>(t));
  }
  return convex_combine(std::move(comps), std::move(weights));
}

SamplerState SamplerState::independent(std::uint64_t seed) noexcept {
  SamplerState s;
  s.seed = seed;
  return s;
}

SamplerState SamplerState::metropolis(std::uint64_t seed, double step_scale,
                                      std::optional<double> start) {
  if (!(step_scale > 0.0) || !std::isfinite(step_scale)) {
    throw ArgumentError("metropolis step_scale must be > 0");
  }
  SamplerState s;
  s.mode = SamplerMode::metropolis;
  s.step_scale = step_scale;
  s.current = start;
  s.seed = seed;
  return s;
}

Draw sample(const Density& d, SamplerState state) {
  rng::UniformStream u(state.seed, state.draw_count);
  ++state.draw_count;
  if (state.mode == SamplerMode::independent) {
    return {sample_exact(d, u), state};
  }
  if (!state.current) {
    const double x = sample_exact(d, u);
    state.current = x;
    return {x, state};
  }
  const double x = *state.current;
  const double proposal = x + state.step_scale * u.next_normal();
  const double accept = u.next();
  const double px = d.pdf(x);
  const double pp = d.pdf(proposal);
  const bool take = pp > 0.0 && (px <= 0.0 || accept * px < pp);
  if (take) {
    state.current = proposal;
    ++state.accepted;
  }
  return {*state.current, state};
}

}  // namespace nskrr
