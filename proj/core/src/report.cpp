#include "dsy/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "dsy/errors.hpp"

namespace dsy {

std::string float_repr(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

CsvWriter::CsvWriter(std::vector<std::string> header) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) body_ += ',';
    body_ += header[i];
  }
  body_ += '\n';
}

void CsvWriter::add_row(const std::vector<double>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) body_ += ',';
    body_ += float_repr(row[i]);
  }
  body_ += '\n';
}

void CsvWriter::add_row(const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) body_ += ',';
    body_ += row[i];
  }
  body_ += '\n';
}

void CsvWriter::write_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot open output file: " + path);
  out << body_;
}

nlohmann::json make_report(const std::string& command,
                           const nlohmann::json& config,
                           const nlohmann::json& results,
                           const nlohmann::json& diagnostics) {
  return nlohmann::json{{"command", command},
                        {"config", config},
                        {"toolkit_version", kToolkitVersion},
                        {"results", results},
                        {"diagnostics", diagnostics}};
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot open output file: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace dsy
