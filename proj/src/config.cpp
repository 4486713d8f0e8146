#include "nskrr/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "nskrr/errors.hpp"

namespace nskrr {
namespace {

using YAML::Node;

int line_of(const Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

[[noreturn]] void fail(const Node& n, const std::string& msg) { throw ConfigError(msg, line_of(n)); }

// Runs a library constructor and re-anchors any precondition failure at `n`.
template <class F>
auto anchored(const Node& n, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(n, e.what());
  }
}

void require_map(const Node& n, const std::string& where) {
  if (!n.IsMap()) fail(n, where + " must be a mapping");
}

void check_keys(const Node& n, const std::string& where, std::initializer_list<std::string_view> allowed) {
  require_map(n, where);
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      std::string list;
      for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
      fail(kv.first, "unknown key '" + key + "' in " + where + " (allowed: " + list + ")");
    }
  }
}

Node required(const Node& parent, const std::string& key, const std::string& where) {
  Node n = parent[key];
  if (!n) fail(parent, "missing key '" + key + "' in " + where);
  return n;
}

double as_double(const Node& n, const std::string& what) {
  if (!n.IsScalar()) fail(n, what + " must be a number");
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    fail(n, what + " must be a number, got '" + n.Scalar() + "'");
  }
}

std::uint64_t as_u64(const Node& n, const std::string& what) {
  if (!n.IsScalar()) fail(n, what + " must be a non-negative integer");
  const std::string& s = n.Scalar();
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    fail(n, what + " must be a non-negative integer, got '" + s + "'");
  }
  return v;
}

std::size_t as_size(const Node& n, const std::string& what) {
  return static_cast<std::size_t>(as_u64(n, what));
}

std::string as_string(const Node& n, const std::string& what) {
  if (!n.IsScalar()) fail(n, what + " must be a string");
  return n.Scalar();
}

std::vector<double> double_list(const Node& n, const std::string& what) {
  if (!n.IsSequence()) fail(n, what + " must be a list");
  std::vector<double> out;
  for (const auto& e : n) out.push_back(as_double(e, what));
  return out;
}

std::vector<std::size_t> size_list(const Node& n, const std::string& what) {
  if (!n.IsSequence()) fail(n, what + " must be a list");
  std::vector<std::size_t> out;
  for (const auto& e : n) out.push_back(as_size(e, what));
  return out;
}

Interval as_interval(const Node& n, const std::string& what) {
  auto v = double_list(n, what);
  if (v.size() != 2) fail(n, what + " must be [lo, hi]");
  if (!(v[0] < v[1])) fail(n, what + " must satisfy lo < hi");
  return {v[0], v[1]};
}

Kernel parse_kernel(const Node& n) {
  check_keys(n, "kernel", {"family", "params", "domain"});
  const auto family = as_string(required(n, "family", "kernel"), "kernel.family");
  const Interval domain = as_interval(required(n, "domain", "kernel"), "kernel.domain");
  Node params = n["params"];
  if (params) require_map(params, "kernel.params");
  auto param = [&](const char* key, double fallback) {
    return params && params[key] ? as_double(params[key], std::string("kernel.params.") + key) : fallback;
  };
  return anchored(n, [&] {
    if (family == "gaussian") {
      if (params) check_keys(params, "kernel.params", {"width"});
      return Kernel::gaussian(param("width", 1.0), domain);
    }
    if (family == "spline") {
      if (params) check_keys(params, "kernel.params", {"order"});
      return Kernel::spline(static_cast<int>(param("order", 2.0)), domain);
    }
    if (family == "periodic") {
      if (params) check_keys(params, "kernel.params", {"period", "harmonics"});
      return Kernel::periodic(param("period", domain.length()), static_cast<int>(param("harmonics", 1.0)),
                              domain);
    }
    fail(n["family"], "unknown kernel family '" + family + "' (expected gaussian, spline or periodic)");
  });
}

StepFunction parse_regression(const Node& n, Interval support) {
  check_keys(n, "regression", {"pieces"});
  Node pieces = required(n, "pieces", "regression");
  if (!pieces.IsSequence()) fail(pieces, "regression.pieces must be a list");
  std::vector<StepPiece> out;
  for (const auto& p : pieces) {
    check_keys(p, "regression piece", {"interval", "value"});
    out.push_back({as_interval(required(p, "interval", "regression piece"), "piece interval"),
                   as_double(required(p, "value", "regression piece"), "piece value")});
  }
  return anchored(pieces, [&] { return StepFunction(std::move(out), support); });
}

Density parse_density(const Node& n, Interval support) {
  require_map(n, "density");
  const auto kind = as_string(required(n, "kind", "density"), "density.kind");
  if (kind == "truncated_gaussian") {
    check_keys(n, "density", {"kind", "center", "scale"});
    const double c = as_double(required(n, "center", "density"), "center");
    const double s = as_double(required(n, "scale", "density"), "scale");
    return anchored(n, [&] { return Density::truncated_gaussian(c, s, support); });
  }
  if (kind == "uniform") {
    check_keys(n, "density", {"kind"});
    return Density::uniform(support);
  }
  if (kind == "piecewise_constant") {
    check_keys(n, "density", {"kind", "breakpoints", "values"});
    auto b = double_list(required(n, "breakpoints", "density"), "breakpoints");
    auto v = double_list(required(n, "values", "density"), "values");
    Density d = anchored(n, [&] { return Density::piecewise_constant(std::move(b), std::move(v)); });
    if (!(d.support() == support)) fail(n, "piecewise_constant breakpoints must span the kernel domain");
    return d;
  }
  if (kind == "mixture") {
    check_keys(n, "density", {"kind", "components", "weights"});
    Node comps = required(n, "components", "density");
    if (!comps.IsSequence()) fail(comps, "mixture components must be a list");
    std::vector<Density> parts;
    for (const auto& c : comps) parts.push_back(parse_density(c, support));
    auto w = double_list(required(n, "weights", "density"), "weights");
    return anchored(n, [&] { return convex_combine(std::move(parts), std::move(w)); });
  }
  fail(n["kind"], "unknown density kind '" + kind +
                      "' (expected truncated_gaussian, uniform, piecewise_constant or mixture)");
}

SamplerConfig parse_sampler(const Node& n) {
  SamplerConfig s;
  std::string mode;
  if (n.IsScalar()) {
    mode = n.Scalar();
  } else {
    check_keys(n, "schedule.sampler", {"mode", "step_scale"});
    mode = as_string(required(n, "mode", "schedule.sampler"), "sampler mode");
    if (n["step_scale"]) s.step_scale = as_double(n["step_scale"], "step_scale");
  }
  if (mode == "independent") {
    s.mode = SamplerMode::independent;
  } else if (mode == "metropolis") {
    s.mode = SamplerMode::metropolis;
  } else {
    fail(n, "unknown sampler mode '" + mode + "' (expected independent or metropolis)");
  }
  if (!(s.step_scale > 0.0)) fail(n, "step_scale must be > 0");
  return s;
}

Config parse_root(const Node& root) {
  check_keys(root, "config",
             {"kernel", "regression", "schedule", "noise", "gamma", "grid", "checkpoints", "seeds",
              "output", "window", "r", "diagnostics", "rate"});

  const Kernel kernel = parse_kernel(required(root, "kernel", "config"));
  const Interval domain = kernel.domain();
  StepFunction h = parse_regression(required(root, "regression", "config"), domain);

  Node sched = required(root, "schedule", "config");
  check_keys(sched, "schedule", {"sampler", "phases"});
  SamplerConfig sampler;
  if (sched["sampler"]) sampler = parse_sampler(sched["sampler"]);
  Node phases_node = required(sched, "phases", "schedule");
  if (!phases_node.IsSequence() || phases_node.size() == 0) {
    fail(phases_node, "schedule.phases must be a non-empty list");
  }
  std::vector<Phase> phases;
  for (const auto& p : phases_node) {
    check_keys(p, "phase", {"density", "count"});
    Density d = parse_density(required(p, "density", "phase"), domain);
    phases.push_back({std::move(d), as_size(required(p, "count", "phase"), "phase count")});
  }
  SamplingSchedule schedule = anchored(phases_node, [&] { return SamplingSchedule(std::move(phases)); });

  Node noise = required(root, "noise", "config");
  check_keys(noise, "noise", {"variance"});
  const double noise_var = as_double(required(noise, "variance", "noise"), "noise.variance");

  Node gamma_node = required(root, "gamma", "config");
  check_keys(gamma_node, "gamma", {"gamma0", "alpha"});
  const double gamma0 = as_double(required(gamma_node, "gamma0", "gamma"), "gamma.gamma0");
  Node alpha_node = required(gamma_node, "alpha", "gamma");
  const double alpha = as_double(alpha_node, "gamma.alpha");
  GammaSchedule gamma = anchored(alpha_node, [&] { return GammaSchedule(gamma0, alpha); });

  Node grid_node = required(root, "grid", "config");
  check_keys(grid_node, "grid", {"nodes"});
  Node nodes = required(grid_node, "nodes", "grid");
  const std::size_t n_nodes = as_size(nodes, "grid.nodes");
  QuadratureGrid grid = anchored(nodes, [&] { return QuadratureGrid(domain, n_nodes); });

  Node cps_node = required(root, "checkpoints", "config");
  auto checkpoints = size_list(cps_node, "checkpoints");

  Node seeds = required(root, "seeds", "config");
  check_keys(seeds, "seeds", {"master", "replicates"});
  const std::uint64_t master = as_u64(required(seeds, "master", "seeds"), "seeds.master");
  const std::size_t replicates = as_size(required(seeds, "replicates", "seeds"), "seeds.replicates");

  Interval window{domain.lo + 0.6 * domain.length(), domain.hi};
  if (root["window"]) window = as_interval(root["window"], "window");
  double r = 1.0;
  if (root["r"]) r = as_double(root["r"], "r");

  Config c{Scenario{kernel, std::move(h), std::move(schedule), noise_var, gamma, std::move(grid),
                    std::move(checkpoints), master, replicates, sampler, window, r}};
  anchored(root, [&] {
    // Re-anchor onto the most specific node we can name.
    try {
      c.scenario.validate();
    } catch (const std::exception& e) {
      const std::string msg = e.what();
      if (msg.find("checkpoints") != std::string::npos) fail(cps_node, msg);
      if (msg.find("replicates") != std::string::npos) fail(seeds, msg);
      if (msg.find("noise") != std::string::npos) fail(noise, msg);
      if (msg.find("window") != std::string::npos) fail(root["window"] ? root["window"] : root, msg);
      throw;
    }
  });
  if (!std::isfinite(gamma0) || gamma0 <= 0.0) fail(gamma_node, "gamma0 must be > 0");

  if (Node out = root["output"]) {
    check_keys(out, "output", {"directory", "formats"});
    if (out["directory"]) c.output_dir = as_string(out["directory"], "output.directory");
    if (Node f = out["formats"]) {
      if (!f.IsSequence()) fail(f, "output.formats must be a list");
      c.write_csv = c.write_json = false;
      for (const auto& e : f) {
        const auto s = as_string(e, "output format");
        if (s == "csv") {
          c.write_csv = true;
        } else if (s == "json") {
          c.write_json = true;
        } else {
          fail(e, "unknown output format '" + s + "' (expected csv or json)");
        }
      }
    }
  }

  if (Node d = root["diagnostics"]) {
    check_keys(d, "diagnostics", {"functions", "max_lag", "replicates", "seed", "positions", "smoothness_ts"});
    auto& dc = c.diagnostics;
    if (Node f = d["functions"]) {
      if (!f.IsSequence() || f.size() == 0) fail(f, "diagnostics.functions must be a non-empty list");
      dc.functions.clear();
      for (const auto& e : f) {
        auto name = as_string(e, "test function");
        anchored(e, [&] { return test_function(name); });
        dc.functions.push_back(name);
      }
    }
    if (d["max_lag"]) dc.max_lag = as_size(d["max_lag"], "diagnostics.max_lag");
    if (d["replicates"]) dc.replicates = as_size(d["replicates"], "diagnostics.replicates");
    if (d["seed"]) dc.seed = as_u64(d["seed"], "diagnostics.seed");
    if (d["positions"]) dc.positions = size_list(d["positions"], "diagnostics.positions");
    if (d["smoothness_ts"]) dc.smoothness_ts = size_list(d["smoothness_ts"], "diagnostics.smoothness_ts");
  }

  if (Node rt = root["rate"]) {
    check_keys(rt, "rate", {"ts", "replicates"});
    if (rt["ts"]) c.rate.ts = size_list(rt["ts"], "rate.ts");
    if (rt["replicates"]) c.rate.replicates = as_size(rt["replicates"], "rate.replicates");
  }
  return c;
}

using nlohmann::ordered_json;

ordered_json density_json(const Density& d) {
  return std::visit(
      [&](const auto& k) -> ordered_json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, TruncatedGaussian>) {
          return {{"kind", "truncated_gaussian"}, {"center", k.center}, {"scale", k.scale}};
        } else if constexpr (std::is_same_v<T, PiecewiseConstant>) {
          if (k.values.size() == 1) return {{"kind", "uniform"}};
          return {{"kind", "piecewise_constant"}, {"breakpoints", k.breakpoints}, {"values", k.values}};
        } else {
          ordered_json comps = ordered_json::array();
          for (const auto& c : k.components) comps.push_back(density_json(c));
          return {{"kind", "mixture"}, {"components", comps}, {"weights", k.weights}};
        }
      },
      d.kind());
}

ordered_json kernel_json(const Kernel& k) {
  ordered_json params = std::visit(
      [](const auto& f) -> ordered_json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussianFamily>) {
          return {{"width", f.width}};
        } else if constexpr (std::is_same_v<T, SplineFamily>) {
          return {{"order", f.order}};
        } else {
          return {{"period", f.period}, {"harmonics", f.harmonics}};
        }
      },
      k.family());
  return {{"family", std::string(k.family_name())},
          {"params", params},
          {"domain", {k.domain().lo, k.domain().hi}}};
}

}  // namespace

Config parse_config(std::string_view text) {
  Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(e.msg, e.mark.is_null() ? 0 : e.mark.line + 1);
  }
  if (!root || root.IsNull()) throw ConfigError("empty config document");
  try {
    return parse_root(root);
  } catch (const ConfigError&) {
    throw;
  } catch (const YAML::Exception& e) {
    throw ConfigError(e.msg, e.mark.is_null() ? 0 : e.mark.line + 1);
  }
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string config_echo(const Config& c) {
  const Scenario& s = c.scenario;
  ordered_json pieces = ordered_json::array();
  for (const auto& p : s.h.pieces()) {
    pieces.push_back({{"interval", {p.interval.lo, p.interval.hi}}, {"value", p.value}});
  }
  ordered_json phases = ordered_json::array();
  for (const auto& p : s.schedule.phases()) {
    phases.push_back({{"density", density_json(p.density)}, {"count", p.count}});
  }
  ordered_json formats = ordered_json::array();
  if (c.write_csv) formats.push_back("csv");
  if (c.write_json) formats.push_back("json");
  const auto& d = c.diagnostics;
  ordered_json j = {
      {"kernel", kernel_json(s.kernel)},
      {"regression", {{"pieces", pieces}}},
      {"schedule",
       {{"sampler",
         {{"mode", s.sampler.mode == SamplerMode::independent ? "independent" : "metropolis"},
          {"step_scale", s.sampler.step_scale}}},
        {"phases", phases}}},
      {"noise", {{"variance", s.noise_var}}},
      {"gamma", {{"gamma0", s.gamma.gamma0()}, {"alpha", s.gamma.alpha()}}},
      {"grid", {{"nodes", s.grid.count()}}},
      {"checkpoints", s.checkpoints},
      {"seeds", {{"master", s.master_seed}, {"replicates", s.replicates}}},
      {"output", {{"directory", c.output_dir.generic_string()}, {"formats", formats}}},
      {"window", {s.error_window.lo, s.error_window.hi}},
      {"r", s.smoothness_r},
      {"diagnostics",
       {{"functions", d.functions},
        {"max_lag", d.max_lag},
        {"replicates", d.replicates},
        {"seed", d.seed},
        {"positions", d.positions},
        {"smoothness_ts", d.smoothness_ts}}},
      {"rate", {{"ts", c.rate.ts}, {"replicates", c.rate.replicates}}},
  };
  return j.dump();
}

}  // namespace nskrr
