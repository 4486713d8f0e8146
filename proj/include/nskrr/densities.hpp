#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "nskrr/kernels.hpp"

namespace nskrr {

class Density;

// Normal(center, scale^2) restricted to the support and renormalised.
struct TruncatedGaussian {
  double center = 0.0;
  double scale = 1.0;
  double mass = 1.0;  // untruncated probability of the support
};

// values[k] is the (normalised) density on [breakpoints[k], breakpoints[k+1]).
struct PiecewiseConstant {
  std::vector<double> breakpoints;
  std::vector<double> values;
};

struct Mixture {
  std::vector<Density> components;
  std::vector<double> weights;
};

// Probability density on a closed interval; zero outside it. Immutable.
class Density {
 public:
  using Kind = std::variant<TruncatedGaussian, PiecewiseConstant, Mixture>;

  static Density truncated_gaussian(double center, double scale, Interval support);
  // `values` need not be normalised; they are rescaled to unit mass.
  static Density piecewise_constant(std::vector<double> breakpoints, std::vector<double> values);
  static Density uniform(Interval support);

  const Kind& kind() const noexcept { return kind_; }
  const Interval& support() const noexcept { return support_; }

  double pdf(double x) const noexcept;
  double cdf(double x) const noexcept;
  // One-sided limits of pdf at x; they differ only at piecewise breakpoints.
  double pdf_left(double x) const noexcept;
  double pdf_right(double x) const noexcept;

  // Strictly positive on the open support.
  bool non_degenerate() const noexcept;

 private:
  friend Density convex_combine(std::vector<Density> components, std::vector<double> weights);
  Density(Kind k, Interval s) : kind_(std::move(k)), support_(s) {}
  Kind kind_;
  Interval support_;
};

// Mixture with pdf = sum_k w_k pdf_k. Weights must be >= 0 and sum to 1
// within 1e-12; all components must share one support.
Density convex_combine(std::vector<Density> components, std::vector<double> weights);

double pdf(const Density& d, double x) noexcept;

struct Phase {
  Density density;
  std::size_t count = 0;
};

// p_1, ..., p_total: phase k governs `count` consecutive draws.
class SamplingSchedule {
 public:
  explicit SamplingSchedule(std::vector<Phase> phases);

  const std::vector<Phase>& phases() const noexcept { return phases_; }
  std::size_t total() const noexcept { return total_; }
  const Interval& support() const noexcept { return phases_.front().density.support(); }

  // 0-based phase index governing draw i (1-based).
  std::size_t phase_of(std::size_t i) const;
  // Number of draws taken from each phase among the first t.
  std::vector<std::size_t> counts_up_to(std::size_t t) const;

 private:
  std::vector<Phase> phases_;
  std::vector<std::size_t> ends_;  // cumulative counts
  std::size_t total_ = 0;
};

const Density& density_at(const SamplingSchedule& s, std::size_t i);

// p_bar_t = (1/t) sum_{i<=t} p_i, as a mixture over the phase densities.
Density average_density(const SamplingSchedule& s, std::size_t t);

enum class SamplerMode { independent, metropolis };

// Value-type sampler state. Draw n is a deterministic function of
// (seed, draw_count, current); nothing is mutated behind the caller's back.
struct SamplerState {
  SamplerMode mode = SamplerMode::independent;
  double step_scale = 2.4;
  std::optional<double> current;  // metropolis position; unset before the first draw
  std::uint64_t seed = 0;
  std::uint64_t draw_count = 0;
  std::uint64_t accepted = 0;  // metropolis acceptances

  static SamplerState independent(std::uint64_t seed) noexcept;
  // Without `start` the chain opens with an exact draw from the first target,
  // i.e. it starts in stationarity.
  static SamplerState metropolis(std::uint64_t seed, double step_scale,
                                 std::optional<double> start = std::nullopt);
};

struct Draw {
  double x;
  SamplerState state;
};

// Independent mode: inverse-CDF draw. Metropolis mode: one random-walk step
// with Gaussian proposal of standard deviation step_scale targeting pdf.
Draw sample(const Density& d, SamplerState state);

}  // namespace nskrr
