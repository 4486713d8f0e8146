#include "nskrr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "nskrr/errors.hpp"
#include "nskrr/random.hpp"

namespace nskrr {
namespace {

constexpr std::uint64_t kInputStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

SeriesStats stats(const std::vector<double>& v) {
  SeriesStats s;
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

void check_ladder(const std::vector<std::size_t>& ts, std::size_t total, const char* what) {
  if (ts.empty()) throw ArgumentError(std::string(what) + ": empty list of t");
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (ts[k] < 1 || ts[k] > total) {
      throw ArgumentError(std::string(what) + ": t = " + std::to_string(ts[k]) +
                          " outside 1.." + std::to_string(total));
    }
    if (k > 0 && ts[k] <= ts[k - 1]) {
      throw ArgumentError(std::string(what) + ": t values must be strictly increasing");
    }
  }
}

GridFunction predictions_on_grid(const KrrModel& m, const QuadratureGrid& grid) {
  return GridFunction::sample(grid, [&m](double x) { return predict(m, x); });
}

}  // namespace

SamplerState SamplerConfig::initial_state(std::uint64_t seed) const {
  return mode == SamplerMode::independent ? SamplerState::independent(seed)
                                          : SamplerState::metropolis(seed, step_scale);
}

void Scenario::validate() const {
  const Interval& d = kernel.domain();
  if (!(schedule.support() == d) || !(grid.support() == d) || !(h.support() == d)) {
    throw ArgumentError("kernel domain, schedule support, grid and step function must share one interval");
  }
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var)) throw ArgumentError("noise variance must be >= 0");
  check_ladder(checkpoints, schedule.total(), "checkpoints");
  if (replicates < 1) throw ArgumentError("replicates must be >= 1");
  if (!(smoothness_r > 0.5 && smoothness_r <= 1.0)) throw ArgumentError("r must lie in (1/2, 1]");
  if (!(error_window.lo < error_window.hi) || error_window.lo < d.lo || error_window.hi > d.hi) {
    throw ArgumentError("error window must be a sub-interval of the domain");
  }
  h.on_grid(grid);  // every breakpoint of h must be a panel boundary
  if (sampler.mode == SamplerMode::metropolis && !(sampler.step_scale > 0.0)) {
    throw ArgumentError("metropolis step_scale must be > 0");
  }
}

Dataset generate_data(const Scenario& s, std::uint64_t seed, std::size_t count) {
  const std::size_t n = count == 0 ? s.schedule.total() : count;
  if (n > s.schedule.total()) throw ArgumentError("generate_data: count exceeds schedule total");
  const auto mu = regression_expansion(s.kernel, s.h, s.grid);
  const double sigma = std::sqrt(s.noise_var);
  const std::uint64_t noise_seed = rng::derive(seed, kNoiseStream);
  SamplerState state = s.sampler.initial_state(rng::derive(seed, kInputStream));

  Dataset d;
  d.inputs.reserve(n);
  d.outputs.reserve(n);
  std::size_t i = 0;
  for (const auto& phase : s.schedule.phases()) {
    for (std::size_t j = 0; j < phase.count && i < n; ++j, ++i) {
      auto draw = sample(phase.density, state);
      state = draw.state;
      double y = mu(draw.x);
      if (sigma > 0.0) y += sigma * rng::standard_normal(noise_seed, i, 0);
      d.inputs.push_back(draw.x);
      d.outputs.push_back(y);
    }
  }
  return d;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < n; k = next++) {
          try {
            fn(k);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

RunReport run_scenario(const Scenario& s, unsigned threads) {
  s.validate();
  const auto mu = build_regression_function(s.kernel, s.h, s.grid);
  const std::size_t nc = s.checkpoints.size();
  const std::size_t horizon = s.checkpoints.back();

  // Everything that depends only on the schedule is shared by all replicates.
  std::vector<CheckpointSummary> summary(nc);
  std::vector<GridFunction> densities;
  for (std::size_t c = 0; c < nc; ++c) {
    const std::size_t t = s.checkpoints[c];
    const Density pbar = average_density(s.schedule, t);
    const double gamma = gamma_at(s.gamma, t);
    const auto mubar = data_free_limit(mu, pbar, gamma, s.kernel);
    summary[c].t = t;
    summary[c].gamma = gamma;
    summary[c].smoothness_norm.mean = smoothness_norm_r1(s.h, pbar, s.grid);
    summary[c].data_free_distance.mean = weighted_norm(mubar - mu, pbar);
    summary[c].density_bounds = density_bounds(pbar, s.grid);
    densities.push_back(density_on_grid(pbar, s.grid));
  }

  std::vector<CheckpointRecord> records(s.replicates * nc);
  std::vector<std::uint64_t> seeds(s.replicates);
  std::vector<double> wall(s.replicates);
  std::vector<GridFunction> estimates(nc, GridFunction::zero(s.grid));

  parallel_for(s.replicates, threads, [&](std::size_t k) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t seed = rng::replicate_seed(s.master_seed, k);
    seeds[k] = seed;
    const Dataset data = generate_data(s, seed, horizon);
    KrrStream stream(s.kernel, gamma_at(s.gamma, 1));
    std::size_t c = 0;
    for (std::size_t i = 0; i < horizon; ++i) {
      stream.push(data.inputs[i], data.outputs[i]);
      if (i + 1 != s.checkpoints[c]) continue;
      stream.retune(summary[c].gamma);
      const KrrModel model = stream.snapshot();
      CheckpointRecord& r = records[k * nc + c];
      r.replicate = k;
      r.seed = seed;
      r.t = s.checkpoints[c];
      r.gamma = summary[c].gamma;
      r.sup_error = sup_error(model, mu);
      r.window_sup_error = sup_error(model, mu, s.error_window);
      r.smoothness_norm = summary[c].smoothness_norm.mean;
      r.data_free_distance = summary[c].data_free_distance.mean;
      if (k == 0) estimates[c] = predictions_on_grid(model, s.grid);
      ++c;
    }
    wall[k] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  for (std::size_t c = 0; c < nc; ++c) {
    std::vector<double> e, w, sn, dd;
    for (std::size_t k = 0; k < s.replicates; ++k) {
      const auto& r = records[k * nc + c];
      e.push_back(r.sup_error);
      w.push_back(r.window_sup_error);
      sn.push_back(r.smoothness_norm);
      dd.push_back(r.data_free_distance);
    }
    summary[c].sup_error = stats(e);
    summary[c].window_sup_error = stats(w);
    summary[c].smoothness_norm = stats(sn);
    summary[c].data_free_distance = stats(dd);
  }

  return RunReport{std::move(records), std::move(summary), std::move(seeds), std::move(wall),
                   mu,                 std::move(estimates), std::move(densities)};
}

std::vector<std::pair<std::size_t, double>> smoothness_trace(const Scenario& s,
                                                             const std::vector<std::size_t>& ts) {
  check_ladder(ts, s.schedule.total(), "smoothness_trace");
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(ts.size());
  for (std::size_t t : ts) {
    const double v = smoothness_norm_r1(s.h, average_density(s.schedule, t), s.grid);
    out.emplace_back(t, v * v);
  }
  return out;
}

TestFunction test_function(const std::string& name) {
  if (name == "x") return {name, [](double x) { return x; }};
  if (name == "x2") return {name, [](double x) { return x * x; }};
  if (name == "sin") return {name, [](double x) { return std::sin(x); }};
  if (name == "cos") return {name, [](double x) { return std::cos(x); }};
  if (name == "step5") return {name, [](double x) { return x < 5.0 ? 1.0 : 0.0; }};
  throw ArgumentError("unknown test function '" + name + "' (expected x, x2, sin, cos or step5)");
}

std::vector<CovarianceRow> covariance_diagnostic(const SamplingSchedule& schedule,
                                                 const CovarianceOptions& opt) {
  if (opt.max_lag < 1) throw ArgumentError("covariance_diagnostic: max_lag must be >= 1");
  if (opt.replicates < 100) throw ArgumentError("covariance_diagnostic: replicates must be >= 100");
  if (opt.functions.empty()) throw ArgumentError("covariance_diagnostic: no test functions");
  std::vector<std::size_t> positions = opt.positions;
  if (positions.empty()) positions = {1, std::max<std::size_t>(1, schedule.total() / 2)};
  std::sort(positions.begin(), positions.end());
  positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
  for (std::size_t p : positions) {
    if (p < 1 || p + opt.max_lag > schedule.total()) {
      throw ArgumentError("covariance_diagnostic: position " + std::to_string(p) + " + max_lag " +
                          std::to_string(opt.max_lag) + " exceeds the schedule total " +
                          std::to_string(schedule.total()));
    }
  }
  const std::size_t width = opt.max_lag + 1;
  const std::size_t chain_len = positions.back() + opt.max_lag;
  const std::size_t reps = opt.replicates;

  // window[p][r * width + k] = x_{positions[p] + k} of chain r
  std::vector<std::vector<double>> window(positions.size(), std::vector<double>(reps * width));
  for (std::size_t r = 0; r < reps; ++r) {
    SamplerState state = opt.sampler.initial_state(rng::replicate_seed(opt.seed, r));
    std::size_t i = 1;
    for (const auto& phase : schedule.phases()) {
      for (std::size_t j = 0; j < phase.count && i <= chain_len; ++j, ++i) {
        auto draw = sample(phase.density, state);
        state = draw.state;
        for (std::size_t p = 0; p < positions.size(); ++p) {
          if (i >= positions[p] && i < positions[p] + width) {
            window[p][r * width + (i - positions[p])] = draw.x;
          }
        }
      }
    }
  }

  std::vector<CovarianceRow> rows;
  const double n = static_cast<double>(reps);
  std::vector<double> a(reps), b(reps), prod(reps);
  for (const auto& g : opt.functions) {
    for (std::size_t p = 0; p < positions.size(); ++p) {
      for (std::size_t r = 0; r < reps; ++r) a[r] = g.fn(window[p][r * width]);
      double mean_a = 0.0;
      for (double v : a) mean_a += v;
      mean_a /= n;
      double ps = 0.0;
      double pse = 0.0;
      for (std::size_t k = 0; k <= opt.max_lag; ++k) {
        double mean_b = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
          b[r] = g.fn(window[p][r * width + k]);
          mean_b += b[r];
        }
        mean_b /= n;
        double sum = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
          prod[r] = (a[r] - mean_a) * (b[r] - mean_b);
          sum += prod[r];
        }
        const double cov = sum / (n - 1.0);
        const double mean_prod = sum / n;
        double var = 0.0;
        for (double v : prod) var += (v - mean_prod) * (v - mean_prod);
        const double se = std::sqrt(var / (n - 1.0)) / std::sqrt(n);
        ps += std::abs(cov);
        pse += se;
        rows.push_back({g.name, positions[p], k, cov, se, ps, pse});
      }
    }
  }
  return rows;
}

PartialSumIncrement partial_sum_increment(const std::vector<CovarianceRow>& rows,
                                          const std::string& function, std::size_t position,
                                          std::size_t k1, std::size_t k2) {
  const CovarianceRow* r1 = nullptr;
  const CovarianceRow* r2 = nullptr;
  for (const auto& r : rows) {
    if (r.function != function || r.position != position) continue;
    if (r.lag == k1) r1 = &r;
    if (r.lag == k2) r2 = &r;
  }
  if (r1 == nullptr || r2 == nullptr || k2 <= k1) {
    throw ArgumentError("partial_sum_increment: lags not present in the table");
  }
  PartialSumIncrement out;
  out.increment = r2->partial_sum - r1->partial_sum;
  out.std_error = r2->partial_sum_se - r1->partial_sum_se;
  out.stabilized = out.increment < 2.0 * out.std_error;
  return out;
}

double theoretical_rate(double alpha, double r) {
  return std::min(alpha * (r - 0.5), 0.5 - alpha);
}

RateEstimate rate_fit(const Scenario& s, const std::vector<std::size_t>& ts, std::size_t replicates,
                      unsigned threads) {
  if (ts.size() < 4) throw ArgumentError("rate_fit: at least 4 values of t are required");
  check_ladder(ts, s.schedule.total(), "rate_fit");
  if (ts.back() < 10 * ts.front()) throw ArgumentError("rate_fit: the t ladder must span a decade");
  if (replicates < 10) throw ArgumentError("rate_fit: at least 10 replicates are required");
  const auto mu = build_regression_function(s.kernel, s.h, s.grid);
  const std::size_t m = ts.size();
  std::vector<double> err(replicates * m);

  parallel_for(replicates, threads, [&](std::size_t k) {
    const Dataset data = generate_data(s, rng::replicate_seed(s.master_seed, k), ts.back());
    for (std::size_t j = 0; j < m; ++j) {
      const std::vector<double> x(data.inputs.begin(), data.inputs.begin() + ts[j]);
      const std::vector<double> y(data.outputs.begin(), data.outputs.begin() + ts[j]);
      err[k * m + j] = sup_error(fit(x, y, s.kernel, gamma_at(s.gamma, ts[j])), mu);
    }
  });

  RateEstimate out;
  out.alpha = s.gamma.alpha();
  out.r = s.smoothness_r;
  out.theoretical = theoretical_rate(out.alpha, out.r);
  std::vector<double> lx, ly;
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> e(replicates);
    for (std::size_t k = 0; k < replicates; ++k) e[k] = err[k * m + j];
    const auto st = stats(e);
    if (!(st.mean > 0.0)) throw NumericError("rate_fit: non-positive mean error at t = " + std::to_string(ts[j]));
    out.points.push_back({ts[j], st.mean, st.stddev});
    lx.push_back(std::log(static_cast<double>(ts[j])));
    ly.push_back(std::log(st.mean));
  }
  const double mx = stats(lx).mean;
  const double my = stats(ly).mean;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    sxx += (lx[j] - mx) * (lx[j] - mx);
    sxy += (lx[j] - mx) * (ly[j] - my);
    syy += (ly[j] - my) * (ly[j] - my);
  }
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ss_res = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double r = ly[j] - (out.intercept + out.slope * lx[j]);
    ss_res += r * r;
  }
  out.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return out;
}

}  // namespace nskrr
