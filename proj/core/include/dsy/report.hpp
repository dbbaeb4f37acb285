#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace dsy {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Shortest round-trip decimal rendering of a double.
std::string float_repr(double v);

// Headered comma-separated table, LF line endings, floats rendered as
// shortest round-trip decimals.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(const std::vector<double>& row);
  void add_row(const std::vector<std::string>& row);
  const std::string& str() const { return body_; }
  void write_file(const std::string& path) const;

 private:
  std::string body_;
};

// Top-level report schema shared by every CLI command:
// {command, config, toolkit_version, results, diagnostics, verdict?}
nlohmann::json make_report(const std::string& command,
                           const nlohmann::json& config,
                           const nlohmann::json& results,
                           const nlohmann::json& diagnostics);

void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace dsy
