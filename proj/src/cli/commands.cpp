#include "resonomatch/cli/commands.hpp"

#include <cmath>
#include <ostream>

#include <json.hpp>

#include "resonomatch/cli/output.hpp"
#include "resonomatch/errors.hpp"
#include "resonomatch/oracle_fd.hpp"
#include "resonomatch/parallel.hpp"

namespace resonomatch::cli {

namespace {
using json = nlohmann::ordered_json;
using cdouble = std::complex<double>;

json complex_json(cdouble z) { return {{"re", z.real()}, {"im", z.imag()}, {"abs", std::abs(z)}}; }

json header_json(const RunConfig& config) {
  json j;
  j["provenance"] = provenance(config).substr(2);
  return j;
}

std::string path_in(const RunConfig& config, const std::string& name) {
  return config.output.directory + "/" + name;
}

void note(const CommandOptions& o, const std::string& line) {
  if (o.log) *o.log << line << "\n";
}

void prepare(const RunConfig& config, const CommandOptions& options) {
  for (const auto& w : validate(config)) note(options, "warning: " + w);
}

scattering::Model model_of(const RunConfig& config) {
  return scattering::make_model(config.geometry, config.truncation);
}

void emit(CommandResult& res, const RunConfig& config, const std::string& name,
          const std::string& contents) {
  const std::string p = path_in(config, name);
  write_file(p, contents);
  res.files.push_back(p);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }
}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const BandError*>(&e))
    return exit_config;
  if (dynamic_cast<const NoResonanceError*>(&e)) return exit_no_resonance;
  if (dynamic_cast<const ResolutionError*>(&e) || dynamic_cast<const GuideLengthError*>(&e))
    return exit_validation;
  return exit_numerical;
}

CommandResult cmd_spectrum(const RunConfig& config, const CommandOptions& options) {
  prepare(config, options);
  const auto rows = resonance::sweep(model_of(config), config.sweep.band(), config.sweep.n_points,
                                     options.workers);
  CommandResult res;
  if (config.output.wants("csv")) emit(res, config, "spectrum.csv", spectrum_csv(config, rows));
  if (config.output.wants("svg")) emit(res, config, "spectrum.svg", spectrum_svg(config, rows));
  if (config.output.wants("json")) {
    json j = header_json(config);
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"k", r.k}, {"r1_D", complex_json(r.r1_D)}, {"r1_N", complex_json(r.r1_N)},
                     {"r1", complex_json(r.r1)}, {"t1", complex_json(r.t1)},
                     {"phase_D_unwrapped", r.phase_D}, {"energy_residual", r.energy_residual},
                     {"flags", flag_text(r.flags)}});
    }
    j["rows"] = arr;
    emit(res, config, "spectrum.json", dump(j));
  }
  double worst = 0.0;
  int flagged = 0;
  for (const auto& r : rows) {
    worst = std::max(worst, r.energy_residual);
    if (r.flags & resonance::flag::shifted) ++flagged;
  }
  res.summary = std::to_string(rows.size()) + " rows, max energy residual " + format_double(worst) +
                ", " + std::to_string(flagged) + " shifted off poles";
  return res;
}

CommandResult cmd_resonance(const RunConfig& config, const CommandOptions& options) {
  prepare(config, options);
  const auto rep = resonance::find_resonance(model_of(config), config.sweep.band());
  json j = header_json(config);
  j["band"] = {config.sweep.k_min, config.sweep.k_max};
  j["hole_width"] = rep.hole_width;
  j["k_star"] = rep.k_star;
  j["k_closed"] = rep.k_closed;
  j["shift"] = rep.k_closed - rep.k_star;
  j["min_abs_r1"] = rep.min_abs_r1;
  j["k_min_abs_r1"] = rep.k_min_abs_r1;
  j["abs_r1_at_kstar"] = rep.abs_r1_at_kstar;
  j["t1_at_kstar"] = complex_json(rep.t1_at_kstar);
  j["r1_D_at_kstar"] = complex_json(rep.r1_D_at_kstar);
  j["determinant_root"] = rep.determinant_root;
  j["resonance_width"] = rep.resonance_width;
  j["window"] = {rep.width_lo, rep.width_hi};
  CommandResult res;
  emit(res, config, "resonance.json", dump(j));
  res.summary = "k_star " + format_double(rep.k_star) + ", |t1(k_star)| " +
                format_double(std::abs(rep.t1_at_kstar));
  return res;
}

CommandResult cmd_field(const RunConfig& config, const CommandOptions& options) {
  prepare(config, options);
  require_in_band(config.geometry, config.field.k);
  const auto model = model_of(config);
  scattering::GridSpec grid;
  grid.ny = config.field.ny;
  grid.nz = config.field.nz;
  grid.y_lo = -config.geometry.b;
  grid.y_hi = config.geometry.b;
  grid.z_lo = -2.0;
  grid.z_hi = config.geometry.a;
  scattering::FieldMap map;
  const double k = config.field.k;
  if (config.field.mode == "combined") {
    map = scattering::field_map(scattering::solve_half(model, k, Parity::dirichlet),
                                scattering::solve_half(model, k, Parity::neumann), grid);
  } else {
    map = scattering::field_map(scattering::solve_half(model, k, parse_parity(config.field.mode)),
                                grid);
  }
  CommandResult res;
  if (config.output.wants("csv")) emit(res, config, "field.csv", field_csv(config, map));
  if (config.output.wants("svg")) emit(res, config, "field.svg", field_svg(config, map));
  if (res.files.empty()) emit(res, config, "field.csv", field_csv(config, map));
  res.summary = "field " + map.tag + " at k = " + format_double(k);
  return res;
}

std::vector<double> validation_points(const Band& band, double k_star) {
  std::vector<double> ks;
  for (double q : {0.125, 0.375, 0.625, 0.875}) ks.push_back(band.lo + q * band.width());
  ks.push_back(k_star - 0.025);
  return ks;
}

ValidationReport run_validation(const RunConfig& config, const CommandOptions& options) {
  ValidationReport rep;
  rep.h = config.oracle.h;
  const Band band = config.sweep.band();
  const auto base = model_of(config);
  rep.k_star = resonance::find_resonance(base, band).k_star;

  oracle_fd::FDGrid grid;
  grid.h = config.oracle.h;
  grid.L = config.oracle.L;
  grid.n_dtn = config.oracle.n_dtn;
  // Both methods see the snapped geometry.
  const oracle_fd::FDLayout lay = oracle_fd::make_layout(config.geometry, Parity::dirichlet, grid);
  const auto snapped = scattering::make_model(lay.snapped, config.truncation);

  auto fd_r1 = [&](double k, Parity p) -> cdouble {
    if (options.self_test) return scattering::solve_half(snapped, k, p).r1;
    return oracle_fd::fd_solve_half(config.geometry, k, p, grid).r1;
  };

  const auto ks = validation_points(band, rep.k_star);
  rep.points.resize(2 * ks.size());
  parallel_for(static_cast<int>(rep.points.size()), options.workers, [&](int i) {
    auto& pt = rep.points[i];
    pt.k = ks[i / 2];
    pt.parity = i % 2 == 0 ? Parity::dirichlet : Parity::neumann;
    pt.r1_mm = scattering::solve_half(snapped, pt.k, pt.parity).r1;
    pt.r1_fd = fd_r1(pt.k, pt.parity);
    pt.delta = std::abs(pt.r1_fd - pt.r1_mm);
    pt.fd_unitarity = std::abs(std::abs(pt.r1_fd) - 1.0);
  });
  double worst_delta = -1.0;
  for (const auto& pt : rep.points) {
    rep.max_delta = std::max(rep.max_delta, pt.delta);
    rep.max_fd_unitarity = std::max(rep.max_fd_unitarity, pt.fd_unitarity);
    if (pt.delta > worst_delta) {
      worst_delta = pt.delta;
      rep.worst = "k = " + format_double(pt.k) + " (" + std::string(to_string(pt.parity)) +
                  "): |dr1| = " + format_double(pt.delta);
    }
  }

  // FD resonance sweep, 40 points over k_star +- 0.04.
  constexpr int n_sweep = 40;
  rep.fd_sweep_k.resize(n_sweep);
  rep.fd_sweep_abs_r1.resize(n_sweep);
  parallel_for(n_sweep, options.workers, [&](int i) {
    const double k = rep.k_star - 0.04 + 0.08 * i / (n_sweep - 1);
    rep.fd_sweep_k[i] = k;
    rep.fd_sweep_abs_r1[i] = std::abs(0.5 * (fd_r1(k, Parity::dirichlet) + fd_r1(k, Parity::neumann)));
  });
  int imin = 0;
  for (int i = 1; i < n_sweep; ++i)
    if (rep.fd_sweep_abs_r1[i] < rep.fd_sweep_abs_r1[imin]) imin = i;
  rep.fd_argmin = rep.fd_sweep_k[imin];
  rep.fd_argmin_offset = rep.fd_argmin - rep.k_star;

  // Refinement study on {2h, h, h/2}, geometry snapped to the coarsest grid.
  rep.k_conv = band.contains(5.0) ? 5.0 : 0.5 * (band.lo + band.hi);
  rep.conv_h = {2.0 * grid.h, grid.h, 0.5 * grid.h};
  if (!options.self_test) {
    const auto coarse = scattering::make_model(oracle_fd::snap_geometry(config.geometry, rep.conv_h[0]),
                                               config.truncation);
    std::vector<oracle_fd::Convergence> conv(2);
    parallel_for(2, options.workers, [&](int i) {
      const Parity p = i == 0 ? Parity::dirichlet : Parity::neumann;
      conv[i] = oracle_fd::fd_convergence(config.geometry, rep.k_conv, p, rep.conv_h, grid.L, grid.n_dtn);
    });
    rep.order_D = conv[0].observed_order;
    rep.order_N = conv[1].observed_order;
    rep.extrap_delta_D =
        std::abs(conv[0].extrapolated - scattering::solve_half(coarse, rep.k_conv, Parity::dirichlet).r1);
    rep.extrap_delta_N =
        std::abs(conv[1].extrapolated - scattering::solve_half(coarse, rep.k_conv, Parity::neumann).r1);
    rep.conv_warning = conv[0].warning.empty() ? conv[1].warning : conv[0].warning;
  }

  rep.agreement_ok = rep.max_delta <= 0.05;
  rep.unitarity_ok = rep.max_fd_unitarity <= 5e-3;
  rep.location_ok = std::abs(rep.fd_argmin_offset) <= 0.02;
  return rep;
}

CommandResult cmd_validate(const RunConfig& config, const CommandOptions& options) {
  prepare(config, options);
  const auto rep = run_validation(config, options);
  json j = header_json(config);
  j["self_test"] = options.self_test;
  j["h"] = rep.h;
  j["L"] = config.oracle.L;
  j["k_star"] = rep.k_star;
  json pts = json::array();
  for (const auto& p : rep.points) {
    pts.push_back({{"k", p.k}, {"parity", to_string(p.parity)}, {"r1_mode_matching", complex_json(p.r1_mm)},
                   {"r1_fd", complex_json(p.r1_fd)}, {"delta", p.delta},
                   {"fd_unitarity", p.fd_unitarity}, {"pass", p.delta <= 0.05}});
  }
  j["points"] = pts;
  j["fd_resonance"] = {{"argmin", rep.fd_argmin}, {"offset", rep.fd_argmin_offset},
                       {"k", rep.fd_sweep_k}, {"abs_r1", rep.fd_sweep_abs_r1}};
  if (!options.self_test) {
    j["convergence"] = {{"k", rep.k_conv}, {"h", rep.conv_h},
                        {"observed_order", {{"dirichlet", rep.order_D}, {"neumann", rep.order_N}}},
                        {"extrapolated_delta", {{"dirichlet", rep.extrap_delta_D}, {"neumann", rep.extrap_delta_N}}},
                        {"warning", rep.conv_warning}};
  }
  j["checks"] = {{"agreement", {{"max_delta", rep.max_delta}, {"bound", 0.05}, {"pass", rep.agreement_ok}}},
                 {"fd_unitarity", {{"max", rep.max_fd_unitarity}, {"bound", 5e-3}, {"pass", rep.unitarity_ok}}},
                 {"resonance_location", {{"offset", rep.fd_argmin_offset}, {"bound", 0.02}, {"pass", rep.location_ok}}}};
  j["pass"] = rep.passed();
  CommandResult res;
  emit(res, config, "validate.json", dump(j));
  if (!rep.passed()) {
    res.exit_code = exit_validation;
    std::string why = !rep.agreement_ok ? "agreement: worst " + rep.worst
                      : !rep.unitarity_ok ? "fd unitarity " + format_double(rep.max_fd_unitarity)
                                          : "fd resonance offset " + format_double(rep.fd_argmin_offset);
    res.summary = "validation failed, " + why;
  } else {
    res.summary = "validation passed, max |dr1| " + format_double(rep.max_delta);
  }
  return res;
}

CommandResult cmd_asymptotics(const RunConfig& config, const CommandOptions& options) {
  prepare(config, options);
  const auto rows = resonance::asymptotic_study(config.geometry, config.widths, config.sweep.band(),
                                                config.truncation);
  CommandResult res;
  emit(res, config, "asymptotics.csv", asymptotics_csv(config, rows));
  if (config.output.wants("svg")) {
    Series shift{"log10 shift", "#1f77b4", {}, {}}, refl{"log10 |r1(k*)|", "#d62728", {}, {}};
    for (const auto& r : rows) {
      shift.x.push_back(r.hole_width);
      shift.y.push_back(std::log10(std::abs(r.shift)));
      refl.x.push_back(r.hole_width);
      refl.y.push_back(std::log10(r.report.abs_r1_at_kstar));
    }
    emit(res, config, "asymptotics.svg",
         line_plot_svg(provenance(config), "Small-hole limit", "hole width", {shift, refl}));
  }
  res.summary = std::to_string(rows.size()) + " widths";
  return res;
}

}  // namespace resonomatch::cli
