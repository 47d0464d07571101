#include "resonomatch/aperture.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <complex>
#include <cmath>
#include <numbers>
#include <string>

#include "resonomatch/errors.hpp"

namespace resonomatch::aperture {

namespace {
constexpr double pi = std::numbers::pi;

// Integral over (-1, 1) of sin(p arccos t) sin(q arccos t) dt, in closed form
// through  int_0^pi cos(m th) sin(th) dth = 2 / (1 - m^2) for even m, 0 for odd m.
double even_moment(int m) {
  if (m % 2 != 0) return 0.0;
  const double md = m;
  return 2.0 / (1.0 - md * md);
}

double unit_gram(int p, int q) {
  return 0.5 * (even_moment(p - q) - even_moment(p + q));
}

// Integral over D of sin(q arccos t) sin(kappa y + c), y = mid + hw t.
double raw_overlap(const ApertureBasis& basis, int q, double kappa, double c) {
  const double hw = basis.half_width();
  const double xi = kappa * hw;
  const double phase = kappa * basis.mid() + c + 0.5 * (q - 1) * pi;
  double bessel_ratio;
  if (std::abs(xi) < 1e-8) {
    // J_q(xi) / xi -> 1/2 for q = 1, 0 otherwise
    bessel_ratio = q == 1 ? 0.5 : 0.0;
  } else {
    bessel_ratio = std::cyl_bessel_j(static_cast<double>(q), xi) / xi;
  }
  return hw * pi * q * bessel_ratio * std::sin(phase);
}
}  // namespace

double ApertureBasis::raw_value(int q, double y) const noexcept {
  if (!(lo < y && y < hi)) return 0.0;
  double t = (y - mid()) / half_width();
  t = std::clamp(t, -1.0, 1.0);
  return std::sin(q * std::acos(t));
}

double ApertureBasis::value(int p, double y) const noexcept {
  if (!(lo < y && y < hi)) return 0.0;
  double sum = 0.0;
  for (int q = 1; q <= p; ++q) sum += to_orthonormal(p - 1, q - 1) * raw_value(q, y);
  return sum;
}

ApertureBasis make_aperture_basis(double lo, double hi, int size) {
  if (!(lo < hi)) throw DomainError("aperture basis: empty interval");
  if (size < 1) throw DomainError("aperture basis: size >= 1 required");
  ApertureBasis basis;
  basis.size = size;
  basis.lo = lo;
  basis.hi = hi;
  const double hw = basis.half_width();
  basis.gram.resize(size, size);
  for (int p = 1; p <= size; ++p)
    for (int q = 1; q <= size; ++q) basis.gram(p - 1, q - 1) = hw * unit_gram(p, q);
  Eigen::LLT<Eigen::MatrixXd> llt(basis.gram);
  if (llt.info() != Eigen::Success) throw NotSpdError("aperture Gram matrix is not SPD");
  Eigen::MatrixXd lower = llt.matrixL();
  basis.to_orthonormal = lower.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(size, size));
  return basis;
}

namespace {
Eigen::MatrixXd raw_coupling(const ApertureBasis& basis, const modal::ModeFamily& family) {
  if (!family.supports(basis.lo, basis.hi))
    throw DomainError("coupling_matrix: aperture outside family support");
  Eigen::MatrixXd raw(basis.size, family.count);
  const double amp = family.amplitude();
  for (int n = 1; n <= family.count; ++n) {
    const double kappa = family.wavenumber(n);
    for (int q = 1; q <= basis.size; ++q)
      raw(q - 1, n - 1) = amp * raw_overlap(basis, q, kappa, -kappa * family.lo);
  }
  return raw;
}

// Raw-basis tail for one family: pq/(pi hw) * len * psi_1(N + 1 - shift) when p, q
// share parity.
Eigen::MatrixXd raw_tail(const ApertureBasis& basis, const modal::ModeFamily& family) {
  const double shift = family.kind == modal::FamilyKind::resonator_neumann ? 0.5 : 0.0;
  const double scale = family.length() * trigamma(family.count + 1 - shift) /
                       (pi * basis.half_width());
  Eigen::MatrixXd tail = Eigen::MatrixXd::Zero(basis.size, basis.size);
  for (int p = 1; p <= basis.size; ++p)
    for (int q = 1; q <= basis.size; ++q)
      if ((p - q) % 2 == 0) tail(p - 1, q - 1) = scale * p * q;
  return tail;
}
}  // namespace

Eigen::MatrixXd coupling_matrix(const ApertureBasis& basis, const modal::ModeFamily& family) {
  return basis.to_orthonormal * raw_coupling(basis, family);
}

Eigen::MatrixXd tail_matrix(const ApertureBasis& basis, const modal::ModeFamily& family) {
  const Eigen::MatrixXd& t = basis.to_orthonormal;
  return t * raw_tail(basis, family) * t.transpose();
}

double trigamma(double x) {
  if (!(x > 0.0)) throw DomainError("trigamma needs x > 0");
  double acc = 0.0;
  while (x < 10.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double r = 1.0 / x;
  const double r2 = r * r;
  // 1/x + 1/2x^2 + sum B_2k / x^(2k+1)
  const double series =
      r * (1.0 + r * 0.5 +
           r2 * (1.0 / 6.0 +
                 r2 * (-1.0 / 30.0 + r2 * (1.0 / 42.0 + r2 * (-1.0 / 30.0 + r2 * 5.0 / 66.0)))));
  return acc + series;
}

std::shared_ptr<const CouplingTable> make_coupling_table(const Geometry& geometry, Parity parity,
                                                         const Truncation& truncation) {
  geometry.validate();
  validate(truncation);
  auto table = std::make_shared<CouplingTable>();
  table->geometry = geometry;
  table->parity = parity;
  table->truncation = truncation;
  table->basis = make_aperture_basis(geometry.hole_lo, geometry.hole_hi, truncation.p_aperture);
  table->guide = modal::guide_modes(geometry, truncation.n_guide);
  table->resonator = modal::resonator_half_modes(geometry, parity, truncation.n_res);
  table->guide_coupling = coupling_matrix(table->basis, table->guide);
  table->resonator_coupling = coupling_matrix(table->basis, table->resonator);
  if (truncation.tail_correction) {
    table->tail = tail_matrix(table->basis, table->guide) + tail_matrix(table->basis, table->resonator);
  } else {
    table->tail = Eigen::MatrixXd::Zero(truncation.p_aperture, truncation.p_aperture);
  }
  return table;
}

GalerkinSystem assemble(const std::shared_ptr<const CouplingTable>& table, double k) {
  if (!table) throw DomainError("assemble: null coupling table");
  const CouplingTable& t = *table;
  GalerkinSystem s;
  s.k = k;
  s.table = table;
  s.gamma = modal::axial_guide(k, t.guide);
  s.gamma1 = s.gamma[0];
  s.resonator_axial.reserve(t.resonator.count);
  for (int n = 0; n < t.resonator.count; ++n)
    s.resonator_axial.push_back(modal::resonator_axial(k, t.resonator.eigenvalues[n], t.geometry.a));

  for (int n = 2; n <= t.resonator.count; ++n) {
    if (s.resonator_axial[n - 1].singular) {
      throw SingularFrequencyError("closed-resonator eigenfrequency of resonator mode " +
                                       std::to_string(n) + " at k = " + std::to_string(k),
                                   n);
    }
  }
  const auto& r1 = s.resonator_axial[0];
  s.tau1_singular = r1.singular;
  s.tau1 = r1.tau;

  s.g_psi = t.guide_coupling.col(0);
  s.g_chi = t.resonator_coupling.col(0);

  // Guide: every mode enters A, mode 1 with +gamma_1 (its -i gamma_1 - gamma_1
  // remainder is a channel).
  s.A = t.guide_coupling * s.gamma.asDiagonal() * t.guide_coupling.transpose();

  Eigen::VectorXd positive = Eigen::VectorXd::Zero(t.resonator.count);
  for (int n = 2; n <= t.resonator.count; ++n) {
    const double tau = s.resonator_axial[n - 1].tau;
    if (tau >= 0.0) {
      positive[n - 1] = tau;
    } else {
      s.extra_modes.push_back(n);
    }
  }
  s.A += t.resonator_coupling * positive.asDiagonal() * t.resonator_coupling.transpose();
  s.A += t.tail;
  s.A = 0.5 * (s.A + s.A.transpose()).eval();
  return s;
}

GalerkinSystem assemble(const Geometry& geometry, double k, Parity parity,
                        const Truncation& truncation) {
  return assemble(make_coupling_table(geometry, parity, truncation), k);
}

namespace {
Eigen::LLT<Eigen::MatrixXd> factor(const GalerkinSystem& system) {
  Eigen::LLT<Eigen::MatrixXd> llt(system.A);
  if (llt.info() != Eigen::Success)
    throw NotSpdError("Galerkin matrix A is not positive definite at k = " +
                      std::to_string(system.k));
  return llt;
}
}  // namespace

QuadForms quad_forms(const GalerkinSystem& system) {
  const auto llt = factor(system);
  const Eigen::VectorXd u = llt.solve(system.g_psi);
  const Eigen::VectorXd v = llt.solve(system.g_chi);
  QuadForms q;
  q.alpha = system.g_psi.dot(u);
  q.delta = system.g_chi.dot(v);
  q.sigma = 0.5 * (system.g_chi.dot(u) + system.g_psi.dot(v));
  return q;
}

double v_norm(const GalerkinSystem& system, const Eigen::VectorXcd& phi) {
  if (phi.size() != system.size()) throw DomainError("v_norm: size mismatch");
  const Eigen::VectorXcd a_phi = system.A.cast<std::complex<double>>() * phi;
  return phi.squaredNorm() + phi.dot(a_phi).real();
}

ChannelSet channel_set(const GalerkinSystem& system) {
  const auto& t = *system.table;
  const int m = 2 + static_cast<int>(system.extra_modes.size());
  ChannelSet c;
  c.couplings.resize(system.size(), m);
  c.coefficients.resize(m);
  c.couplings.col(0) = system.g_psi;
  c.coefficients[0] = std::complex<double>(-system.gamma1, -system.gamma1);
  c.couplings.col(1) = system.g_chi;
  c.coefficients[1] = system.tau1;
  c.resonator_modes.push_back(1);
  for (int j = 0; j < static_cast<int>(system.extra_modes.size()); ++j) {
    const int n = system.extra_modes[j];
    c.couplings.col(2 + j) = t.resonator_coupling.col(n - 1);
    c.coefficients[2 + j] = system.resonator_axial[n - 1].tau;
    c.resonator_modes.push_back(n);
  }
  const auto llt = factor(system);
  const Eigen::MatrixXd w = llt.solve(c.couplings);
  c.gram = c.couplings.transpose() * w;
  c.gram = 0.5 * (c.gram + c.gram.transpose()).eval();
  return c;
}

}  // namespace resonomatch::aperture
