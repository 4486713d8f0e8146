#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nskrr::cli {

// Process exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 2;  // bad flags, bad config, invalid scenario
inline constexpr int kNumericError = 3;
inline constexpr int kIoError = 1;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::optional<std::filesystem::path> output;
  std::optional<std::vector<std::size_t>> ts;
  std::optional<unsigned> threads;
};

// --threads, else NONSTAT_KRR_THREADS, else the number of logical cores.
unsigned resolve_threads(const std::optional<unsigned>& flag);

int cmd_run(const std::filesystem::path& config, const Overrides& o, std::ostream& out, std::ostream& err);
int cmd_rate(const std::filesystem::path& config, const Overrides& o, std::ostream& out, std::ostream& err);
int cmd_diagnose(const std::filesystem::path& config, const std::string& mode, const Overrides& o,
                 std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nskrr::cli
