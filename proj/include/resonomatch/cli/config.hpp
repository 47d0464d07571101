#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "resonomatch/geometry.hpp"

namespace resonomatch::cli {

struct SweepConfig {
  double k_min = 4.0;
  double k_max = 7.8;
  int n_points = 400;

  Band band() const { return {k_min, k_max}; }
  bool operator==(const SweepConfig&) const = default;
};

struct OracleConfig {
  double h = 1.0 / 128.0;
  double L = 2.0;
  int n_dtn = 30;

  bool operator==(const OracleConfig&) const = default;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"csv"};

  bool wants(std::string_view format) const;
  bool operator==(const OutputConfig&) const = default;
};

struct FieldConfig {
  double k = 5.0;
  std::string mode = "combined";  // dirichlet | neumann | combined
  int ny = 200;
  int nz = 300;

  bool operator==(const FieldConfig&) const = default;
};

struct RunConfig {
  Geometry geometry;
  Truncation truncation;
  // Reject configurations that break n >= 10 P (guide width / hole width)
  // instead of warning.
  bool strict_truncation = false;
  SweepConfig sweep;
  OracleConfig oracle;
  OutputConfig output;
  FieldConfig field;
  std::vector<double> widths{0.3, 0.2, 0.1, 0.05};

  bool operator==(const RunConfig&) const = default;
};

// Sectioned key = value text. '#' and ';' start comments. Unknown sections or
// keys and malformed values throw ConfigError naming the line.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

// Fully resolved text; parse_config(serialize(c)) reproduces c exactly.
std::string serialize(const RunConfig& config);

// Throws ConfigError on violated invariants; returns warnings otherwise.
std::vector<std::string> validate(const RunConfig& config);

// FNV-1a 64 of serialize(config), 16 hex digits.
std::string config_hash(const RunConfig& config);
std::uint64_t fnv1a64(std::string_view bytes);

// %.17g: 17 significant digits, exact double round trip.
std::string format_double(double x);

}  // namespace resonomatch::cli
