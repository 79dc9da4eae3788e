#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "svp/field.hpp"
#include "svp/geometry.hpp"
#include "svp/structure.hpp"

namespace svp {

/// Config problems; line is 0 when the error is not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0);
  int line() const { return line_; }

 private:
  int line_;
};

inline constexpr const char* kConfigHeader = "svp-lab-config 1";

/// One `[task <kind>]` block. Values are kept as text and read on demand.
struct TaskConfig {
  std::string kind;
  std::string name;
  int line = 0;
  std::vector<std::pair<std::string, std::string>> entries;

  bool has(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback = "") const;
  double number(const std::string& key, std::optional<double> fallback = std::nullopt) const;
  bool flag(const std::string& key, bool fallback) const;
  /// Comma or whitespace separated values, or `a to b step d`.
  std::vector<double> list(const std::string& key, std::vector<double> fallback = {}) const;
  /// Groups separated by ';', each a list of `arity` values.
  std::vector<std::vector<double>> groups(const std::string& key, std::size_t arity) const;
};

struct RunConfig {
  CanonicalDomain domain;
  StructureOperator op = StructureOperator::constant(2.0, 1.0);
  std::string low_text = "0";
  std::string high_text = "0";
  double h = 1.0 / 32.0;
  bool refine = false;
  SolverSettings solver;
  std::vector<TaskConfig> tasks;
  std::string output_directory;
  std::vector<std::string> formats{"json", "csv", "svg"};
  std::uint64_t seed = 1;
  /// Echo of every block as parsed, in file order.
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> echo;

  BoundarySpec boundary() const;
  bool wants(const std::string& format) const;
};

/// Parses `key = value` blocks after the schema header. Throws ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Parses a value list as in TaskConfig::list.
std::vector<double> parse_list(const std::string& text);

}  // namespace svp
