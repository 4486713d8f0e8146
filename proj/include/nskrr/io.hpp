#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nskrr/krr.hpp"
#include "nskrr/quadrature.hpp"

namespace nskrr::io {

// Shortest form that round-trips a double ("%.17g", '.' separator).
std::string format_double(double v);

// Writes to a sibling temp file and renames it into place, so readers never
// see a truncated file.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  CsvWriter& cell(double v);
  CsvWriter& cell(std::size_t v);
  CsvWriter& cell(std::string_view v);
  void end_row();

  const std::string& str() const noexcept { return out_; }

 private:
  void separator();
  std::string out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

// node,value rows for every grid node.
std::string grid_function_csv(const GridFunction& f);

// Header comment with gamma, t and the kernel, then support,coefficient rows.
std::string model_csv(const KrrModel& m);

}  // namespace nskrr::io
