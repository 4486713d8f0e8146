#include "nskrr/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "nskrr/config.hpp"
#include "nskrr/errors.hpp"
#include "nskrr/experiment.hpp"
#include "nskrr/io.hpp"

namespace nskrr::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr const char* kVersion = "1.0.0";

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ArgumentError& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kUsageError;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kUsageError;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
}

// The echo in summary.json keeps the config file's output directory, so runs
// that differ only in --output write identical bytes.
struct Loaded {
  Config config;
  fs::path echo_dir;
};

Loaded load_with_echo(const fs::path& path, const Overrides& o) {
  Config c = load_config(path);
  const fs::path echo_dir = c.output_dir;
  if (o.seed) c.scenario.master_seed = *o.seed;
  if (o.replicates) c.scenario.replicates = *o.replicates;
  if (o.output) c.output_dir = *o.output;
  c.scenario.validate();
  return {std::move(c), echo_dir};
}

Config load(const fs::path& path, const Overrides& o) { return load_with_echo(path, o).config; }

ordered_json stats_json(const SeriesStats& s) { return {{"mean", s.mean}, {"stddev", s.stddev}}; }

std::string report_csv(const RunReport& r) {
  io::CsvWriter w({"replicate", "seed", "t", "gamma", "sup_error", "window_sup_error", "smoothness_norm",
                   "data_free_distance"});
  for (const auto& rec : r.records) {
    w.cell(rec.replicate).cell(std::to_string(rec.seed)).cell(rec.t).cell(rec.gamma).cell(rec.sup_error);
    w.cell(rec.window_sup_error).cell(rec.smoothness_norm).cell(rec.data_free_distance);
    w.end_row();
  }
  return w.str();
}

std::string summary_json(Config c, const fs::path& echo_dir, const RunReport& r) {
  c.output_dir = echo_dir;
  ordered_json cps = ordered_json::array();
  for (const auto& s : r.summary) {
    cps.push_back({{"t", s.t},
                   {"gamma", s.gamma},
                   {"sup_error", stats_json(s.sup_error)},
                   {"window_sup_error", stats_json(s.window_sup_error)},
                   {"smoothness_norm", stats_json(s.smoothness_norm)},
                   {"data_free_distance", stats_json(s.data_free_distance)},
                   {"density_bounds", {{"lower", s.density_bounds.lower}, {"upper", s.density_bounds.upper}}}});
  }
  ordered_json j = {{"version", kVersion},
                    {"config", ordered_json::parse(config_echo(c))},
                    {"seeds", r.seeds},
                    {"checkpoints", cps}};
  return j.dump(2) + "\n";
}

std::vector<std::size_t> default_smoothness_ts(std::size_t total) {
  const std::size_t step = total >= 100 ? 100 : 1;
  std::vector<std::size_t> ts;
  for (std::size_t t = step; t <= total; t += step) ts.push_back(t);
  if (ts.back() != total) ts.push_back(total);
  return ts;
}

}  // namespace

unsigned resolve_threads(const std::optional<unsigned>& flag) {
  if (flag) {
    if (*flag == 0) throw ArgumentError("--threads must be >= 1");
    return *flag;
  }
  if (const char* env = std::getenv("NONSTAT_KRR_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ArgumentError("NONSTAT_KRR_THREADS must be a positive integer");
    return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_run(const fs::path& config, const Overrides& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto [c, echo_dir] = load_with_echo(config, o);
    const unsigned threads = resolve_threads(o.threads);
    const RunReport r = run_scenario(c.scenario, threads);
    const fs::path dir = c.output_dir;
    if (c.write_csv) {
      io::write_atomic(dir / "report.csv", report_csv(r));
      io::write_atomic(dir / "mu.csv", io::grid_function_csv(r.mu));
      for (std::size_t k = 0; k < r.summary.size(); ++k) {
        const std::string t = std::to_string(r.summary[k].t);
        io::write_atomic(dir / ("estimate_t" + t + ".csv"), io::grid_function_csv(r.estimates[k]));
        io::write_atomic(dir / ("avg_density_t" + t + ".csv"), io::grid_function_csv(r.average_densities[k]));
      }
    }
    if (c.write_json) io::write_atomic(dir / "summary.json", summary_json(c, echo_dir, r));

    double wall = 0.0;
    for (double w : r.wall_seconds) wall += w;
    out << std::setw(8) << "t" << std::setw(14) << "gamma" << std::setw(24) << "sup_error"
        << std::setw(24) << "window_sup_error" << std::setw(14) << "||L^-1 mu||" << '\n';
    for (const auto& s : r.summary) {
      out << std::setw(8) << s.t << std::setw(14) << std::setprecision(5) << s.gamma << std::setw(12)
          << s.sup_error.mean << " +- " << std::setw(8) << s.sup_error.stddev << std::setw(12)
          << s.window_sup_error.mean << " +- " << std::setw(8) << s.window_sup_error.stddev << std::setw(14)
          << s.smoothness_norm.mean << '\n';
    }
    out << c.scenario.replicates << " replicates on " << threads << " thread(s), " << std::setprecision(3)
        << wall << " s of replicate time; outputs in " << dir.string() << '\n';
    return kOk;
  });
}

int cmd_rate(const fs::path& config, const Overrides& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Config c = load(config, o);
    if (o.ts) c.rate.ts = *o.ts;
    if (o.replicates) c.rate.replicates = *o.replicates;
    if (c.rate.ts.size() < 4) {
      throw ArgumentError("--ts needs at least 4 values, got " + std::to_string(c.rate.ts.size()));
    }
    const RateEstimate est = rate_fit(c.scenario, c.rate.ts, c.rate.replicates, resolve_threads(o.threads));
    io::CsvWriter w({"t", "mean_error", "stddev"});
    for (const auto& p : est.points) {
      w.cell(p.t).cell(p.mean_error).cell(p.stddev);
      w.end_row();
    }
    ordered_json j = {{"slope", est.slope},   {"intercept", est.intercept}, {"r2", est.r2},
                      {"theoretical", est.theoretical}, {"alpha", est.alpha},      {"r", est.r},
                      {"ts", c.rate.ts},       {"replicates", c.rate.replicates}};
    io::write_atomic(c.output_dir / "rate.csv", w.str());
    io::write_atomic(c.output_dir / "rate.json", j.dump(2) + "\n");
    out << "slope " << est.slope << " (r2 " << est.r2 << "), theoretical rate " << est.theoretical << '\n';
    return kOk;
  });
}

int cmd_diagnose(const fs::path& config, const std::string& mode, const Overrides& o, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    Config c = load(config, o);
    const Scenario& s = c.scenario;
    if (mode == "smoothness") {
      std::vector<std::size_t> ts = o.ts ? *o.ts : c.diagnostics.smoothness_ts;
      if (ts.empty()) ts = default_smoothness_ts(s.schedule.total());
      io::CsvWriter w({"t", "value"});
      for (const auto& [t, v] : smoothness_trace(s, ts)) {
        w.cell(t).cell(v);
        w.end_row();
      }
      io::write_atomic(c.output_dir / "smoothness.csv", w.str());
      out << "wrote " << ts.size() << " smoothness values to " << (c.output_dir / "smoothness.csv").string()
          << '\n';
      return kOk;
    }
    if (mode == "covariance") {
      CovarianceOptions opt;
      opt.sampler = s.sampler;
      for (const auto& name : c.diagnostics.functions) opt.functions.push_back(test_function(name));
      opt.max_lag = c.diagnostics.max_lag;
      opt.replicates = o.replicates ? *o.replicates : c.diagnostics.replicates;
      opt.seed = o.seed ? *o.seed : c.diagnostics.seed;
      opt.positions = c.diagnostics.positions;
      const auto rows = covariance_diagnostic(s.schedule, opt);
      io::CsvWriter w({"function", "position", "lag", "estimate", "std_error", "partial_sum", "partial_sum_se"});
      std::size_t outside = 0;
      for (const auto& r : rows) {
        w.cell(r.function).cell(r.position).cell(r.lag).cell(r.estimate).cell(r.std_error);
        w.cell(r.partial_sum).cell(r.partial_sum_se);
        w.end_row();
        if (r.lag >= 1 && std::abs(r.estimate) > 3.0 * r.std_error) ++outside;
      }
      io::write_atomic(c.output_dir / "covariance.csv", w.str());
      out << outside << " of " << rows.size() << " rows have |Cov| beyond 3 standard errors at lag >= 1\n";
      return kOk;
    }
    throw ArgumentError("--mode must be smoothness or covariance, got '" + mode + "'");
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kernel ridge regression under non-stationary sampling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  fs::path config;
  std::uint64_t seed = 0;
  std::size_t replicates = 0;
  unsigned threads = 0;
  std::string output;
  std::vector<std::size_t> ts;
  std::string mode = "smoothness";

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Scenario config (YAML)")->required();
    sub->add_option("--seed", seed, "Master seed override");
    sub->add_option("--replicates", replicates, "Replicate count override")->check(CLI::PositiveNumber);
    sub->add_option("--threads", threads, "Worker threads (default: NONSTAT_KRR_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--output", output, "Output directory override");
  };
  CLI::App* run = app.add_subcommand("run", "Run the scenario and write report, summary and grid CSVs");
  common(run);
  CLI::App* rate = app.add_subcommand("rate", "Fit the empirical convergence rate");
  common(rate);
  rate->add_option("--ts", ts, "Comma-separated sample sizes")->delimiter(',');
  CLI::App* diag = app.add_subcommand("diagnose", "Smoothness trace or covariance diagnostic");
  common(diag);
  diag->add_option("--mode", mode, "smoothness or covariance");
  diag->add_option("--ts", ts, "Comma-separated sample sizes (smoothness mode)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsageError;
  }

  CLI::App* used = app.get_subcommands().front();
  Overrides o;
  if (used->count("--seed") > 0) o.seed = seed;
  if (used->count("--replicates") > 0) o.replicates = replicates;
  if (used->count("--threads") > 0) o.threads = threads;
  if (used->count("--output") > 0) o.output = output;
  if (used->get_option_no_throw("--ts") != nullptr && used->count("--ts") > 0) o.ts = ts;

  if (used == run) return cmd_run(config, o, out, err);
  if (used == rate) return cmd_rate(config, o, out, err);
  return cmd_diagnose(config, mode, o, out, err);
}

}  // namespace nskrr::cli
