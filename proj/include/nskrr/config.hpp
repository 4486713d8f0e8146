#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nskrr/experiment.hpp"

namespace nskrr {

struct DiagnosticsConfig {
  std::vector<std::string> functions{"x", "x2"};
  std::size_t max_lag = 50;
  std::size_t replicates = 10000;
  std::uint64_t seed = 1;
  std::vector<std::size_t> positions;       // empty: {1, total/2}
  std::vector<std::size_t> smoothness_ts;  // empty: every 100 draws
};

struct RateConfig {
  std::vector<std::size_t> ts{250, 500, 1000, 2000, 4000};
  std::size_t replicates = 20;
};

struct Config {
  Scenario scenario;
  std::filesystem::path output_dir = "out";
  bool write_csv = true;
  bool write_json = true;
  DiagnosticsConfig diagnostics{};
  RateConfig rate{};
};

// Parses a YAML scenario document. Every failure, including an invalid
// scenario, is reported as ConfigError with the offending line when known.
Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& path);

// JSON rendering of the whole config. JSON is valid YAML, so the result
// parses back through parse_config into an equivalent Config.
std::string config_echo(const Config& c);

}  // namespace nskrr
