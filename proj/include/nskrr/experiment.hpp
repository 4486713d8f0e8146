#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nskrr/densities.hpp"
#include "nskrr/kernels.hpp"
#include "nskrr/krr.hpp"
#include "nskrr/operator.hpp"
#include "nskrr/quadrature.hpp"

namespace nskrr {

struct SamplerConfig {
  SamplerMode mode = SamplerMode::independent;
  double step_scale = 2.4;

  SamplerState initial_state(std::uint64_t seed) const;
};

struct Scenario {
  Kernel kernel;
  StepFunction h;
  SamplingSchedule schedule;
  double noise_var;
  GammaSchedule gamma;
  QuadratureGrid grid;
  std::vector<std::size_t> checkpoints;
  std::uint64_t master_seed;
  std::size_t replicates;
  SamplerConfig sampler{};
  // Sub-interval on which a second, local sup-norm error is reported.
  Interval error_window{6.0, 10.0};
  // Smoothness index used for the theoretical learning rate.
  double smoothness_r = 1.0;

  // Throws ArgumentError on inconsistent fields.
  void validate() const;
};

// x_i from density_at(schedule, i), y_i = mu(x_i) + nu_i with nu_i ~ N(0, noise_var)
// drawn from a stream independent of the inputs. `count` defaults to the schedule total.
Dataset generate_data(const Scenario& s, std::uint64_t seed, std::size_t count = 0);

struct CheckpointRecord {
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::size_t t = 0;
  double gamma = 0.0;
  double sup_error = 0.0;
  double window_sup_error = 0.0;
  double smoothness_norm = 0.0;     // ||L_t^{-1} mu||_t
  double data_free_distance = 0.0;  // ||mu_bar_t - mu||_t
};

struct SeriesStats {
  double mean = 0.0;
  double stddev = 0.0;
};

struct CheckpointSummary {
  std::size_t t = 0;
  double gamma = 0.0;
  SeriesStats sup_error;
  SeriesStats window_sup_error;
  SeriesStats smoothness_norm;
  SeriesStats data_free_distance;
  DensityBounds density_bounds;  // min/max of p_bar_t on the grid
};

struct RunReport {
  std::vector<CheckpointRecord> records;  // replicate-major, checkpoints in order
  std::vector<CheckpointSummary> summary;
  std::vector<std::uint64_t> seeds;
  std::vector<double> wall_seconds;  // per replicate; not part of any written file
  GridFunction mu;
  std::vector<GridFunction> estimates;         // replicate 0, one per checkpoint
  std::vector<GridFunction> average_densities;  // p_bar_t on the grid, one per checkpoint
};

// Streams every replicate's samples through the estimator, retuning gamma to
// gamma(t) at each checkpoint. Replicates run on up to `threads` workers.
RunReport run_scenario(const Scenario& s, unsigned threads = 1);

// (t, ||L_t^{-1} mu||_t^2) for each t.
std::vector<std::pair<std::size_t, double>> smoothness_trace(const Scenario& s,
                                                             const std::vector<std::size_t>& ts);

struct TestFunction {
  std::string name;
  std::function<double(double)> fn;
};

// Named test functions: x, x2, sin, cos, step5 (indicator of x < 5).
TestFunction test_function(const std::string& name);

struct CovarianceRow {
  std::string function;
  std::size_t position = 0;  // i
  std::size_t lag = 0;       // k
  double estimate = 0.0;     // Cov(g(x_i), g(x_{i+k}))
  double std_error = 0.0;
  double partial_sum = 0.0;     // sum_{j<=k} |Cov_j|
  double partial_sum_se = 0.0;  // sum_{j<=k} stderr_j
};

struct CovarianceOptions {
  SamplerConfig sampler{};
  std::vector<TestFunction> functions;
  std::size_t max_lag = 50;
  std::size_t replicates = 10000;
  std::uint64_t seed = 0;
  // 1-based positions i; empty means {1, total/2}.
  std::vector<std::size_t> positions;
};

// Monte Carlo estimate of Cov(g(x_i), g(x_{i+k})) across independent chains.
std::vector<CovarianceRow> covariance_diagnostic(const SamplingSchedule& schedule,
                                                 const CovarianceOptions& opt);

struct PartialSumIncrement {
  double increment = 0.0;
  double std_error = 0.0;
  bool stabilized = false;  // increment < 2 * std_error
};

// Change of the partial sum between lags k1 and k2 for one (function, position).
PartialSumIncrement partial_sum_increment(const std::vector<CovarianceRow>& rows,
                                          const std::string& function, std::size_t position,
                                          std::size_t k1, std::size_t k2);

struct RatePoint {
  std::size_t t = 0;
  double mean_error = 0.0;
  double stddev = 0.0;
};

struct RateEstimate {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double theoretical = 0.0;
  double alpha = 0.0;
  double r = 1.0;
  std::vector<RatePoint> points;
};

// min(alpha (r - 1/2), 1/2 - alpha)
double theoretical_rate(double alpha, double r);

// Least-squares slope of log(mean sup error) against log t over the ladder.
// Each replicate's data set is fitted in batch at every t with gamma(t).
RateEstimate rate_fit(const Scenario& s, const std::vector<std::size_t>& ts,
                      std::size_t replicates, unsigned threads = 1);

// Calls fn(k) for k in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace nskrr
