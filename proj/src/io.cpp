#include "nskrr/io.hpp"

#include <cstdio>
#include <fstream>

#include "nskrr/errors.hpp"

namespace nskrr::io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_atomic(const std::filesystem::path& path, std::string_view contents) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    f.flush();
    if (!f) {
      f.close();
      fs::remove(tmp);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  if (header.empty()) throw ArgumentError("CsvWriter: empty header");
  for (const auto& h : header) cell(h);
  end_row();
}

void CsvWriter::separator() {
  if (filled_ == columns_) throw ArgumentError("CsvWriter: too many cells in row");
  if (filled_ > 0) out_ += ',';
  ++filled_;
}

CsvWriter& CsvWriter::cell(double v) {
  separator();
  out_ += format_double(v);
  return *this;
}

CsvWriter& CsvWriter::cell(std::size_t v) {
  separator();
  out_ += std::to_string(v);
  return *this;
}

CsvWriter& CsvWriter::cell(std::string_view v) {
  separator();
  out_ += v;
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) throw ArgumentError("CsvWriter: incomplete row");
  out_ += '\n';
  filled_ = 0;
}

std::string grid_function_csv(const GridFunction& f) {
  CsvWriter w({"node", "value"});
  const auto& nodes = f.grid().nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    w.cell(nodes[i]).cell(f.values()[i]);
    w.end_row();
  }
  return w.str();
}

std::string model_csv(const KrrModel& m) {
  std::string out = "# gamma=" + format_double(m.gamma()) + " t=" + std::to_string(m.size()) +
                    " kernel=" + std::string(m.kernel().family_name()) + "\n";
  CsvWriter w({"support", "coefficient"});
  for (std::size_t i = 0; i < m.size(); ++i) {
    w.cell(m.support()[i]).cell(m.coeffs()[i]);
    w.end_row();
  }
  return out + w.str();
}

}  // namespace nskrr::io
