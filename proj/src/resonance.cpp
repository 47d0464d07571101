#include "resonomatch/resonance.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "resonomatch/errors.hpp"
#include "resonomatch/parallel.hpp"

namespace resonomatch::resonance {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double pole_guard = 1e-8;

// arg in [0, 2 pi): wraps exactly where r1 passes +1.
double positive_arg(cdouble z) {
  double a = std::arg(z);
  if (a < 0.0) a += two_pi;
  if (a >= two_pi) a -= two_pi;
  return a;
}

int sign_of(double x) { return x < 0.0 ? -1 : 1; }

void require_band(const Geometry& geometry, const Band& band) {
  const Band single = single_mode_band(geometry);
  if (!(single.lo < band.lo && band.lo < band.hi && band.hi < single.hi)) {
    throw BandError("band (" + std::to_string(band.lo) + ", " + std::to_string(band.hi) +
                    ") not inside single-mode band (" + std::to_string(single.lo) + ", " +
                    std::to_string(single.hi) + ")");
  }
}

// (s, t) with tau = t / s, both bounded through every pole.
std::pair<double, double> pole_free_pair(const modal::ResonatorAxial& ax, double a) {
  switch (ax.regime) {
    case modal::AxialRegime::oscillatory:
      return {ax.sin_ba / ax.beta, std::cos(ax.beta * a)};
    case modal::AxialRegime::cutoff:
      return {a, 1.0};
    default: {
      const double e = std::exp(-2.0 * ax.beta * a);
      return {-std::expm1(-2.0 * ax.beta * a) / (2.0 * ax.beta), 0.5 * (1.0 + e)};
    }
  }
}
}  // namespace

std::vector<double> closed_resonator_poles(const Geometry& geometry, const Truncation& truncation,
                                           const Band& band, const Parity* parity) {
  std::vector<double> poles;
  auto add_family = [&](Parity p) {
    const auto fam = modal::resonator_half_modes(geometry, p, truncation.n_res);
    for (int n = 1; n <= fam.count; ++n) {
      const double mu = fam.eigenvalues[n - 1];
      if (mu >= band.hi * band.hi) break;
      for (int j = 1;; ++j) {
        const double kj = std::sqrt(mu + std::pow(j * pi / geometry.a, 2));
        if (kj >= band.hi + pole_guard) break;
        if (kj > band.lo - pole_guard) poles.push_back(kj);
      }
    }
  };
  if (parity) {
    add_family(*parity);
  } else {
    add_family(Parity::dirichlet);
    add_family(Parity::neumann);
  }
  std::sort(poles.begin(), poles.end());
  return poles;
}

bool avoid_poles(double& k, const std::vector<double>& poles) {
  for (double p : poles) {
    if (std::abs(k - p) < pole_guard) {
      k = k >= p ? p + pole_guard : p - pole_guard;
      return true;
    }
  }
  return false;
}

double resonance_function(const aperture::GalerkinSystem& system) {
  const auto& t = *system.table;
  const double a = t.geometry.a;
  const auto ch = aperture::channel_set(system);
  const auto m = ch.gram.rows();
  Eigen::VectorXd s(m), tt(m);
  s[0] = 1.0;
  tt[0] = -system.gamma1;
  for (Eigen::Index j = 1; j < m; ++j) {
    const auto [sj, tj] = pole_free_pair(system.resonator_axial[ch.resonator_modes[j - 1] - 1], a);
    s[j] = sj;
    tt[j] = tj;
  }
  Eigen::MatrixXd mat = tt.asDiagonal() * ch.gram;
  mat.diagonal() += s;
  double value = mat.partialPivLu().determinant();

  // Oscillatory modes kept inside A contribute sign(sin beta a) so that the
  // sign of the result is independent of how modes are partitioned.
  std::vector<bool> is_channel(t.resonator.count + 1, false);
  for (int n : ch.resonator_modes) is_channel[n] = true;
  for (int n = 2; n <= t.resonator.count; ++n) {
    const auto& ax = system.resonator_axial[n - 1];
    if (!is_channel[n] && ax.regime == modal::AxialRegime::oscillatory && ax.sin_ba < 0.0)
      value = -value;
  }
  return value;
}

double resonance_function(const scattering::Model& model, double k, Parity parity) {
  return resonance_function(aperture::assemble(model.table(parity), k));
}

cdouble determinant(const aperture::GalerkinSystem& system) {
  if (system.tau1_singular)
    return {std::numeric_limits<double>::infinity(), 0.0};
  const auto ch = aperture::channel_set(system);
  Eigen::MatrixXcd mat = ch.coefficients.asDiagonal() * ch.gram.cast<cdouble>();
  mat.diagonal().array() += 1.0;
  return mat.partialPivLu().determinant();
}

cdouble determinant(const scattering::Model& model, double k) {
  return determinant(aperture::assemble(model.dirichlet, k));
}

cdouble determinant(const Geometry& geometry, double k, const Truncation& truncation) {
  return determinant(aperture::assemble(geometry, k, Parity::dirichlet, truncation));
}

std::vector<SpectrumRow> sweep(const scattering::Model& model, const Band& band, int n_points,
                               int workers) {
  if (n_points < 2) throw DomainError("sweep needs n_points >= 2");
  require_band(model.geometry, band);
  const auto poles = closed_resonator_poles(model.geometry, model.truncation, band);
  std::vector<SpectrumRow> rows(n_points);
  parallel_for(n_points, workers, [&](int i) {
    SpectrumRow& row = rows[i];
    double k = i == n_points - 1 ? band.hi
                                 : band.lo + band.width() * static_cast<double>(i) / (n_points - 1);
    if (avoid_poles(k, poles)) row.flags |= flag::shifted;
    row.k = k;
    const auto sys_d = aperture::assemble(model.dirichlet, k);
    const auto sd = scattering::solve_half(sys_d);
    const auto sn = scattering::solve_half(model, k, Parity::neumann);
    const auto full = scattering::combine(sd, sn);
    row.r1_D = full.r1_D;
    row.r1_N = full.r1_N;
    row.r1 = full.r1;
    row.t1 = full.t1;
    row.abs_r1 = std::abs(full.r1);
    row.abs_t1 = std::abs(full.t1);
    row.energy_residual = full.energy_residual;
    row.unitarity_D = sd.unitarity_residual;
    row.unitarity_N = sn.unitarity_residual;
    row.resonance_function = resonance_function(sys_d);
    row.phase_D = positive_arg(full.r1_D);
  });

  // The phase only increases; every sign change of the resonance function is
  // one pass through +1, where positive_arg wraps from 2 pi to 0.
  double offset = 0.0;
  for (int i = 1; i < n_points; ++i) {
    const double raw = rows[i].phase_D;
    if (sign_of(rows[i].resonance_function) != sign_of(rows[i - 1].resonance_function))
      offset += two_pi;
    rows[i].phase_D = raw + offset;
    if (std::abs(rows[i].phase_D - rows[i - 1].phase_D) >= pi) rows[i].flags |= flag::phase_gap;
  }
  return rows;
}

std::vector<SpectrumRow> sweep(const Geometry& geometry, const Band& band, int n_points,
                               const Truncation& truncation, int workers) {
  return sweep(scattering::make_model(geometry, truncation), band, n_points, workers);
}

double brent_root(const std::function<double(double)>& f, double lo, double hi, double tol,
                  int max_iter) {
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw DomainError("brent_root: interval does not bracket a root");
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 0; iter < max_iter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
  }
  return b;
}

double golden_minimum(const std::function<double(double)>& f, double lo, double hi, double tol) {
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - ratio * (b - a), x2 = a + ratio * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol * (1.0 + std::abs(a) + std::abs(b)) * 0.5 && b - a > 1e-15) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = f(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

namespace {
struct Sample {
  double k;
  scattering::FullScattering s;
};

std::optional<scattering::FullScattering> try_full(const scattering::Model& model, double k) {
  try {
    return scattering::solve_full(model, k);
  } catch (const SingularFrequencyError&) {
    return std::nullopt;
  }
}

// -r1_D conj(r1_N): equals +1 exactly where r1 = 0.
cdouble parity_ratio(const scattering::FullScattering& s) { return -s.r1_D * std::conj(s.r1_N); }
}  // namespace

ResonanceReport find_resonance(const scattering::Model& model, const Band& band) {
  const Geometry& geo = model.geometry;
  require_band(geo, band);
  ResonanceReport rep;
  rep.hole_width = geo.hole_width();
  rep.k_closed = closed_resonator_frequency(geo);
  const auto poles = closed_resonator_poles(geo, model.truncation, band);

  auto phi_d = [&](double k) { return resonance_function(model, k, Parity::dirichlet); };

  // Coarse bracketing of r1^D = +1.
  constexpr int coarse = 200;
  std::vector<double> ks, fs;
  double arg_lo = two_pi, arg_hi = 0.0;
  for (int i = 0; i < coarse; ++i) {
    double k = band.lo + band.width() * (i + 0.5) / coarse;
    avoid_poles(k, poles);
    try {
      fs.push_back(phi_d(k));
      ks.push_back(k);
      if (auto s = try_full(model, k)) {
        const double ar = positive_arg(s->r1_D);
        arg_lo = std::min(arg_lo, ar);
        arg_hi = std::max(arg_hi, ar);
      }
    } catch (const SingularFrequencyError&) {
    }
  }
  std::optional<double> best;
  for (size_t i = 1; i < ks.size(); ++i) {
    if (sign_of(fs[i]) == sign_of(fs[i - 1])) continue;
    const double root = brent_root(phi_d, ks[i - 1], ks[i], 1e-10);
    double kr = root;
    if (avoid_poles(kr, poles)) continue;
    const auto s = try_full(model, kr);
    if (!s || std::abs(s->r1_D - 1.0) > 1e-3) continue;
    if (!best || std::abs(root - rep.k_closed) < std::abs(*best - rep.k_closed)) best = root;
  }
  if (!best) {
    throw NoResonanceError("no r1^D = +1 crossing in band (" + std::to_string(band.lo) + ", " +
                           std::to_string(band.hi) + "); arg r1^D range [" +
                           std::to_string(arg_lo) + ", " + std::to_string(arg_hi) + "]");
  }
  rep.k_star = *best;
  const auto at_star = scattering::solve_full(model, rep.k_star);
  rep.r1_D_at_kstar = at_star.r1_D;
  rep.t1_at_kstar = at_star.t1;
  rep.abs_r1_at_kstar = std::abs(at_star.r1);

  // Window samples, geometrically clustered around k_star.
  std::vector<Sample> samples{{rep.k_star, at_star}};
  constexpr int per_side = 161;
  for (int side : {-1, 1}) {
    for (int i = 0; i < per_side; ++i) {
      const double off = std::pow(10.0, -9.0 + 8.0 * i / (per_side - 1));
      double k = rep.k_star + side * off;
      if (!(band.lo < k && k < band.hi)) continue;
      avoid_poles(k, poles);
      if (auto s = try_full(model, k)) samples.push_back({k, *s});
    }
  }
  std::sort(samples.begin(), samples.end(),
            [](const Sample& x, const Sample& y) { return x.k < y.k; });
  const auto star_it = std::find_if(samples.begin(), samples.end(),
                                    [&](const Sample& s) { return s.k == rep.k_star; });
  const auto is = static_cast<size_t>(star_it - samples.begin());

  auto abs_t1 = [&](double k) { return std::abs(scattering::solve_full(model, k).t1) - 0.7; };
  rep.width_lo = samples.front().k;
  for (size_t i = is; i-- > 0;) {
    if (std::abs(samples[i].s.t1) < 0.7) {
      rep.width_lo = brent_root(abs_t1, samples[i].k, samples[i + 1].k, 1e-12);
      break;
    }
  }
  rep.width_hi = samples.back().k;
  for (size_t i = is + 1; i < samples.size(); ++i) {
    if (std::abs(samples[i].s.t1) < 0.7) {
      rep.width_hi = brent_root(abs_t1, samples[i - 1].k, samples[i].k, 1e-12);
      break;
    }
  }
  rep.resonance_width = rep.width_hi - rep.width_lo;

  // Zero of r1 inside the window: Im of the parity ratio with positive real part.
  auto im_ratio = [&](double k) { return parity_ratio(scattering::solve_full(model, k)).imag(); };
  std::optional<double> zero;
  size_t arg_min = is;
  for (size_t i = 0; i < samples.size(); ++i)
    if (std::abs(samples[i].s.r1) < std::abs(samples[arg_min].s.r1)) arg_min = i;
  for (size_t i = 1; i < samples.size(); ++i) {
    const cdouble q0 = parity_ratio(samples[i - 1].s), q1 = parity_ratio(samples[i].s);
    if (sign_of(q0.imag()) == sign_of(q1.imag()) || (q0.real() <= 0.0 && q1.real() <= 0.0))
      continue;
    double root;
    try {
      root = brent_root(im_ratio, samples[i - 1].k, samples[i].k, 1e-13);
    } catch (const SingularFrequencyError&) {
      continue;
    }
    if (parity_ratio(scattering::solve_full(model, root)).real() <= 0.0) continue;
    if (!zero || std::abs(root - rep.k_star) < std::abs(*zero - rep.k_star)) zero = root;
  }
  if (zero) {
    rep.k_min_abs_r1 = *zero;
    rep.min_abs_r1 = std::abs(scattering::solve_full(model, *zero).r1);
  } else {
    rep.k_min_abs_r1 = samples[arg_min].k;
    rep.min_abs_r1 = std::abs(samples[arg_min].s.r1);
  }

  // Local minimum of |det| next to k_star, on the near side of the tau_1 pole.
  auto abs_det = [&](double k) {
    try {
      return std::abs(determinant(model, k));
    } catch (const SingularFrequencyError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  size_t jd = is;
  double dmin = abs_det(rep.k_star);
  std::vector<double> dvals(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    dvals[i] = abs_det(samples[i].k);
    if (std::abs(samples[i].k - rep.k_star) <= 0.05 && dvals[i] < dmin) {
      dmin = dvals[i];
      jd = i;
    }
  }
  const double lo = samples[jd == 0 ? 0 : jd - 1].k;
  const double hi = samples[std::min(jd + 1, samples.size() - 1)].k;
  rep.determinant_root = lo < hi ? golden_minimum(abs_det, lo, hi, 1e-14) : samples[jd].k;
  return rep;
}

ResonanceReport find_resonance(const Geometry& geometry, const Band& band,
                               const Truncation& truncation) {
  return find_resonance(scattering::make_model(geometry, truncation), band);
}

std::vector<AsymptoticRow> asymptotic_study(const Geometry& base, const std::vector<double>& widths,
                                            const Band& band, const Truncation& truncation) {
  std::vector<AsymptoticRow> rows;
  for (double w : widths) {
    const Geometry geo = base.with_hole_width(w);
    geo.validate();
    Truncation tr = truncation;
    const int n = recommended_modes(geo, tr.p_aperture);
    tr.n_guide = std::max(tr.n_guide, n);
    tr.n_res = std::max(tr.n_res, n);
    const auto model = scattering::make_model(geo, tr);
    AsymptoticRow row;
    row.hole_width = w;
    row.n_modes = std::max(tr.n_guide, tr.n_res);
    row.report = find_resonance(model, band);
    row.shift = row.report.k_closed - row.report.k_star;
    const auto q = aperture::quad_forms(aperture::assemble(model.dirichlet, row.report.k_closed));
    row.alpha = q.alpha;
    row.delta = q.delta;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace resonomatch::resonance
