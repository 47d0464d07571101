#include "resonomatch/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "resonomatch/errors.hpp"

namespace resonomatch::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  while (!s.empty()) {
    const auto comma = s.find(',');
    const auto item = trim(s.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

struct Cursor {
  int line = 0;
  std::string key;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config line " + std::to_string(line) + " (" + key + "): " + what);
  }

  double to_double(std::string_view v) const {
    double x = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || ptr != end || !std::isfinite(x)) fail("expected a number, got '" + std::string(v) + "'");
    return x;
  }

  int to_int(std::string_view v) const {
    int x = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || ptr != end) fail("expected an integer, got '" + std::string(v) + "'");
    return x;
  }

  bool to_bool(std::string_view v) const {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail("expected true|false, got '" + std::string(v) + "'");
  }
};

using Setter = std::function<void(RunConfig&, std::string_view, const Cursor&)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> s = {
      {"geometry",
       {
           {"guide_lo", [](RunConfig& c, std::string_view v, const Cursor& k) { c.geometry.guide_lo = k.to_double(v); }},
           {"guide_hi", [](RunConfig& c, std::string_view v, const Cursor& k) { c.geometry.guide_hi = k.to_double(v); }},
           {"b", [](RunConfig& c, std::string_view v, const Cursor& k) { c.geometry.b = k.to_double(v); }},
           {"a", [](RunConfig& c, std::string_view v, const Cursor& k) { c.geometry.a = k.to_double(v); }},
           {"hole_lo", [](RunConfig& c, std::string_view v, const Cursor& k) { c.geometry.hole_lo = k.to_double(v); }},
           {"hole_hi", [](RunConfig& c, std::string_view v, const Cursor& k) { c.geometry.hole_hi = k.to_double(v); }},
       }},
      {"truncation",
       {
           {"n_guide", [](RunConfig& c, std::string_view v, const Cursor& k) { c.truncation.n_guide = k.to_int(v); }},
           {"n_res", [](RunConfig& c, std::string_view v, const Cursor& k) { c.truncation.n_res = k.to_int(v); }},
           {"p_aperture", [](RunConfig& c, std::string_view v, const Cursor& k) { c.truncation.p_aperture = k.to_int(v); }},
           {"tail_correction", [](RunConfig& c, std::string_view v, const Cursor& k) { c.truncation.tail_correction = k.to_bool(v); }},
           {"rule",
            [](RunConfig& c, std::string_view v, const Cursor& k) {
              if (v == "warn") c.strict_truncation = false;
              else if (v == "reject") c.strict_truncation = true;
              else k.fail("expected warn|reject");
            }},
       }},
      {"sweep",
       {
           {"k_min", [](RunConfig& c, std::string_view v, const Cursor& k) { c.sweep.k_min = k.to_double(v); }},
           {"k_max", [](RunConfig& c, std::string_view v, const Cursor& k) { c.sweep.k_max = k.to_double(v); }},
           {"n_points", [](RunConfig& c, std::string_view v, const Cursor& k) { c.sweep.n_points = k.to_int(v); }},
       }},
      {"oracle",
       {
           {"h", [](RunConfig& c, std::string_view v, const Cursor& k) { c.oracle.h = k.to_double(v); }},
           {"L", [](RunConfig& c, std::string_view v, const Cursor& k) { c.oracle.L = k.to_double(v); }},
           {"n_dtn", [](RunConfig& c, std::string_view v, const Cursor& k) { c.oracle.n_dtn = k.to_int(v); }},
       }},
      {"output",
       {
           {"directory", [](RunConfig& c, std::string_view v, const Cursor&) { c.output.directory = std::string(v); }},
           {"formats", [](RunConfig& c, std::string_view v, const Cursor&) { c.output.formats = split_list(v); }},
       }},
      {"field",
       {
           {"k", [](RunConfig& c, std::string_view v, const Cursor& k) { c.field.k = k.to_double(v); }},
           {"mode", [](RunConfig& c, std::string_view v, const Cursor&) { c.field.mode = std::string(v); }},
           {"ny", [](RunConfig& c, std::string_view v, const Cursor& k) { c.field.ny = k.to_int(v); }},
           {"nz", [](RunConfig& c, std::string_view v, const Cursor& k) { c.field.nz = k.to_int(v); }},
       }},
      {"asymptotics",
       {
           {"widths",
            [](RunConfig& c, std::string_view v, const Cursor& k) {
              c.widths.clear();
              for (const auto& item : split_list(v)) c.widths.push_back(k.to_double(item));
            }},
       }},
  };
  return s;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

}  // namespace

bool OutputConfig::wants(std::string_view format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  const auto& sch = schema();
  const std::map<std::string, Setter>* section = nullptr;
  Cursor cur;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++cur.line;
    std::string_view line = raw;
    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        cur.key = std::string(line);
        cur.fail("unterminated section header");
      }
      const std::string name(trim(line.substr(1, line.size() - 2)));
      const auto it = sch.find(name);
      cur.key = name;
      if (it == sch.end()) cur.fail("unknown section");
      section = &it->second;
      continue;
    }
    const auto eq = line.find('=');
    cur.key = std::string(trim(line.substr(0, eq)));
    if (eq == std::string_view::npos) cur.fail("expected key = value");
    if (!section) cur.fail("key outside any section");
    const auto it = section->find(cur.key);
    if (it == section->end()) cur.fail("unknown key");
    it->second(c, trim(line.substr(eq + 1)), cur);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize(const RunConfig& c) {
  std::ostringstream o;
  const auto d = format_double;
  o << "[geometry]\n"
    << "guide_lo = " << d(c.geometry.guide_lo) << "\n"
    << "guide_hi = " << d(c.geometry.guide_hi) << "\n"
    << "b = " << d(c.geometry.b) << "\n"
    << "a = " << d(c.geometry.a) << "\n"
    << "hole_lo = " << d(c.geometry.hole_lo) << "\n"
    << "hole_hi = " << d(c.geometry.hole_hi) << "\n\n"
    << "[truncation]\n"
    << "n_guide = " << c.truncation.n_guide << "\n"
    << "n_res = " << c.truncation.n_res << "\n"
    << "p_aperture = " << c.truncation.p_aperture << "\n"
    << "tail_correction = " << (c.truncation.tail_correction ? "true" : "false") << "\n"
    << "rule = " << (c.strict_truncation ? "reject" : "warn") << "\n\n"
    << "[sweep]\n"
    << "k_min = " << d(c.sweep.k_min) << "\n"
    << "k_max = " << d(c.sweep.k_max) << "\n"
    << "n_points = " << c.sweep.n_points << "\n\n"
    << "[oracle]\n"
    << "h = " << d(c.oracle.h) << "\n"
    << "L = " << d(c.oracle.L) << "\n"
    << "n_dtn = " << c.oracle.n_dtn << "\n\n"
    << "[output]\n"
    << "directory = " << c.output.directory << "\n"
    << "formats = " << join(c.output.formats) << "\n\n"
    << "[field]\n"
    << "k = " << d(c.field.k) << "\n"
    << "mode = " << c.field.mode << "\n"
    << "ny = " << c.field.ny << "\n"
    << "nz = " << c.field.nz << "\n\n"
    << "[asymptotics]\n";
  std::vector<std::string> w;
  for (double x : c.widths) w.push_back(d(x));
  o << "widths = " << join(w) << "\n";
  return o.str();
}

std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> warnings;
  try {
    c.geometry.validate();
    validate(c.truncation);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (!satisfies_truncation_rule(c.geometry, c.truncation)) {
    const std::string msg = "truncation rule n_guide, n_res >= 10 P (guide width / hole width) = " +
                            std::to_string(recommended_modes(c.geometry, c.truncation.p_aperture)) +
                            " violated (n_guide = " + std::to_string(c.truncation.n_guide) +
                            ", n_res = " + std::to_string(c.truncation.n_res) + ")";
    if (c.strict_truncation) throw ConfigError(msg);
    warnings.push_back(msg);
  }
  const Band single = single_mode_band(c.geometry);
  if (!(single.lo < c.sweep.k_min && c.sweep.k_min < c.sweep.k_max && c.sweep.k_max < single.hi)) {
    throw ConfigError("sweep band (" + format_double(c.sweep.k_min) + ", " +
                      format_double(c.sweep.k_max) + ") not inside single-mode band (" +
                      format_double(single.lo) + ", " + format_double(single.hi) + ")");
  }
  if (c.sweep.n_points < 2) throw ConfigError("sweep: n_points >= 2 required");
  if (!(c.oracle.h > 0.0) || !(c.oracle.L > 0.0) || c.oracle.n_dtn < 1)
    throw ConfigError("oracle: h > 0, L > 0, n_dtn >= 1 required");
  for (const auto& f : c.output.formats)
    if (f != "csv" && f != "svg" && f != "json") throw ConfigError("output: unknown format '" + f + "'");
  if (c.output.directory.empty()) throw ConfigError("output: directory must not be empty");
  if (c.field.mode != "dirichlet" && c.field.mode != "neumann" && c.field.mode != "combined")
    throw ConfigError("field: mode must be dirichlet|neumann|combined");
  if (c.field.ny < 2 || c.field.nz < 2) throw ConfigError("field: ny, nz >= 2 required");
  for (double w : c.widths) {
    try {
      c.geometry.with_hole_width(w).validate();
    } catch (const DomainError& e) {
      throw ConfigError("asymptotics: width " + format_double(w) + ": " + e.what());
    }
  }
  return warnings;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash(const RunConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(serialize(c))));
  return buf;
}

}  // namespace resonomatch::cli
