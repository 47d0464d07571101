#include "resonomatch/cli/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "resonomatch/errors.hpp"

namespace resonomatch::cli {

namespace {
std::string fixed(double x, int digits = 3) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += ch;
    }
  }
  return out;
}

// Round step 1, 2 or 5 x 10^n giving about `target` ticks.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  return (r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0) * mag;
}

// Black-red-yellow-white ramp, t in [0, 1].
std::string heat_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255 * std::min(1.0, 1.6 * t)));
  const int g = static_cast<int>(std::lround(255 * std::clamp(1.6 * t - 0.6, 0.0, 1.0)));
  const int b = static_cast<int>(std::lround(255 * std::clamp(0.5 - 2.0 * std::abs(t - 0.25), 0.0, 1.0) +
                                             255 * std::clamp(2.5 * t - 1.5, 0.0, 1.0)));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, std::min(b, 255));
  return buf;
}
}  // namespace

std::string provenance(const RunConfig& config) {
  return std::string("# resonomatch ") + RESONOMATCH_VERSION + " config=" + config_hash(config);
}

std::string flag_text(unsigned flags) {
  std::string s;
  if (flags & resonance::flag::shifted) s += "shifted";
  if (flags & resonance::flag::phase_gap) s += std::string(s.empty() ? "" : "|") + "phase_gap";
  return s;
}

std::string spectrum_csv(const RunConfig& config, const std::vector<resonance::SpectrumRow>& rows) {
  std::string out = provenance(config) + "\n";
  out += "k,re_r1D,im_r1D,re_r1N,im_r1N,re_r1,im_r1,re_t1,im_t1,abs_r1,abs_t1,"
         "phase_D_unwrapped,energy_residual,flags\n";
  const auto d = format_double;
  for (const auto& r : rows) {
    out += d(r.k) + "," + d(r.r1_D.real()) + "," + d(r.r1_D.imag()) + "," + d(r.r1_N.real()) + "," +
           d(r.r1_N.imag()) + "," + d(r.r1.real()) + "," + d(r.r1.imag()) + "," + d(r.t1.real()) +
           "," + d(r.t1.imag()) + "," + d(r.abs_r1) + "," + d(r.abs_t1) + "," + d(r.phase_D) + "," +
           d(r.energy_residual) + "," + flag_text(r.flags) + "\n";
  }
  return out;
}

std::string line_plot_svg(const std::string& comment, const std::string& title,
                          const std::string& x_label, const std::vector<Series>& series) {
  constexpr double W = 720, H = 420, left = 60, right = 20, top = 36, bottom = 50;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (double x : s.x) xmin = std::min(xmin, x), xmax = std::max(xmax, x);
    for (double y : s.y) ymin = std::min(ymin, y), ymax = std::max(ymax, y);
  }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (W - left - right); };
  auto py = [&](double y) { return H - bottom - (y - ymin) / (ymax - ymin) * (H - top - bottom); };

  std::ostringstream o;
  o << "<!--" << comment.substr(1) << " -->\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << " " << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
    << xml_escape(title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right
    << "\" height=\"" << H - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";

  const double xs = nice_step(xmax - xmin, 8);
  for (double t = std::ceil(xmin / xs) * xs; t <= xmax + 1e-12; t += xs) {
    o << "<line x1=\"" << fixed(px(t), 2) << "\" y1=\"" << H - bottom << "\" x2=\"" << fixed(px(t), 2)
      << "\" y2=\"" << H - bottom + 5 << "\" stroke=\"black\"/>";
    o << "<text x=\"" << fixed(px(t), 2) << "\" y=\"" << H - bottom + 18
      << "\" text-anchor=\"middle\">" << fixed(t, 2) << "</text>\n";
  }
  const double ys = nice_step(ymax - ymin, 6);
  for (double t = std::ceil(ymin / ys) * ys; t <= ymax + 1e-12; t += ys) {
    o << "<line x1=\"" << left - 5 << "\" y1=\"" << fixed(py(t), 2) << "\" x2=\"" << left
      << "\" y2=\"" << fixed(py(t), 2) << "\" stroke=\"black\"/>";
    o << "<text x=\"" << left - 8 << "\" y=\"" << fixed(py(t) + 4, 2)
      << "\" text-anchor=\"end\">" << fixed(t, 2) << "</text>\n";
  }
  o << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
    << xml_escape(x_label) << "</text>\n";

  for (size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t j = 0; j < s.x.size(); ++j)
      o << (j ? " " : "") << fixed(px(s.x[j]), 2) << "," << fixed(py(s.y[j]), 2);
    o << "\"/>\n";
    const double ly = top + 16 + 16 * static_cast<double>(i);
    o << "<line x1=\"" << W - right - 110 << "\" y1=\"" << ly << "\" x2=\"" << W - right - 90
      << "\" y2=\"" << ly << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>";
    o << "<text x=\"" << W - right - 84 << "\" y=\"" << ly + 4 << "\">" << xml_escape(s.label)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string spectrum_svg(const RunConfig& config, const std::vector<resonance::SpectrumRow>& rows) {
  Series r{"|r1|", "#1f77b4", {}, {}}, t{"|t1|", "#d62728", {}, {}};
  for (const auto& row : rows) {
    r.x.push_back(row.k);
    r.y.push_back(row.abs_r1);
    t.x.push_back(row.k);
    t.y.push_back(row.abs_t1);
  }
  return line_plot_svg(provenance(config), "Reflection and transmission", "k", {r, t});
}

std::string field_csv(const RunConfig& config, const scattering::FieldMap& map) {
  std::string out = provenance(config) + "\n";
  out += "y,z,re_u,im_u,abs_u\n";
  const auto d = format_double;
  for (size_t i = 0; i < map.y.size(); ++i) {
    for (size_t j = 0; j < map.z.size(); ++j) {
      if (!map.in_domain(static_cast<int>(i), static_cast<int>(j))) continue;
      const auto u = map.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      out += d(map.y[i]) + "," + d(map.z[j]) + "," + d(u.real()) + "," + d(u.imag()) + "," +
             d(std::abs(u)) + "\n";
    }
  }
  return out;
}

std::string field_svg(const RunConfig& config, const scattering::FieldMap& map) {
  // z runs left to right, y bottom to top.
  const auto ny = map.y.size(), nz = map.z.size();
  constexpr double cell = 2.0;
  const double W = nz * cell + 20, H = ny * cell + 40;
  double umax = 0.0;
  for (size_t i = 0; i < ny; ++i)
    for (size_t j = 0; j < nz; ++j)
      if (map.in_domain(static_cast<int>(i), static_cast<int>(j)))
        umax = std::max(umax, std::abs(map.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
  if (umax == 0.0) umax = 1.0;
  std::ostringstream o;
  o << "<!--" << provenance(config).substr(1) << " -->\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"#dddddd\"/>\n";
  o << "<text x=\"10\" y=\"20\">|u| (" << xml_escape(map.tag) << "), max " << fixed(umax, 4)
    << "</text>\n<g shape-rendering=\"crispEdges\">\n";
  for (size_t i = 0; i < ny; ++i) {
    for (size_t j = 0; j < nz; ++j) {
      if (!map.in_domain(static_cast<int>(i), static_cast<int>(j))) continue;
      const double v = std::abs(map.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) / umax;
      o << "<rect x=\"" << fixed(10 + j * cell, 1) << "\" y=\"" << fixed(30 + (ny - 1 - i) * cell, 1)
        << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"" << heat_color(v) << "\"/>\n";
    }
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

std::string asymptotics_csv(const RunConfig& config,
                            const std::vector<resonance::AsymptoticRow>& rows) {
  std::string out = provenance(config) + "\n";
  out += "hole_width,n_modes,k_star,k_closed,shift,abs_r1_at_kstar,min_abs_r1,k_min_abs_r1,"
         "abs_t1_at_kstar,resonance_width,determinant_root,alpha,delta\n";
  const auto d = format_double;
  for (const auto& r : rows) {
    const auto& p = r.report;
    out += d(r.hole_width) + "," + std::to_string(r.n_modes) + "," + d(p.k_star) + "," +
           d(p.k_closed) + "," + d(r.shift) + "," + d(p.abs_r1_at_kstar) + "," + d(p.min_abs_r1) +
           "," + d(p.k_min_abs_r1) + "," + d(std::abs(p.t1_at_kstar)) + "," + d(p.resonance_width) +
           "," + d(p.determinant_root) + "," + d(r.alpha) + "," + d(r.delta) + "\n";
  }
  return out;
}

void write_file(const std::string& path, const std::string& contents) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << contents;
  if (!f) throw ConfigError("write failed for '" + path + "'");
}

}  // namespace resonomatch::cli
