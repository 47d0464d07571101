#include "resonomatch/modal.hpp"

#include <limits>
#include <numbers>
#include <string>

#include "resonomatch/errors.hpp"

namespace resonomatch::modal {

namespace {
constexpr double pi = std::numbers::pi;

// Beyond this coth(beta a) equals 1 to double precision.
constexpr double coth_saturation = 20.0;

ModeFamily make_family(FamilyKind kind, double lo, double hi, int count) {
  if (count < 1) throw DomainError("mode count must be >= 1");
  ModeFamily f;
  f.kind = kind;
  f.lo = lo;
  f.hi = hi;
  f.count = count;
  f.eigenvalues.resize(count);
  for (int n = 1; n <= count; ++n) {
    const double kappa = f.wavenumber(n);
    f.eigenvalues[n - 1] = kappa * kappa;
  }
  return f;
}
}  // namespace

double ModeFamily::wavenumber(int n) const noexcept {
  const double shift = kind == FamilyKind::resonator_neumann ? 0.5 : 0.0;
  return (n - shift) * pi / length();
}

double ModeFamily::value(int n, double y) const noexcept {
  return amplitude() * std::sin(wavenumber(n) * (y - lo));
}

double ModeFamily::slope(int n, double y) const noexcept {
  const double kappa = wavenumber(n);
  return amplitude() * kappa * std::cos(kappa * (y - lo));
}

ModeFamily guide_modes(const Geometry& geometry, int count) {
  geometry.validate();
  return make_family(FamilyKind::guide, geometry.guide_lo, geometry.guide_hi, count);
}

ModeFamily resonator_half_modes(const Geometry& geometry, Parity parity, int count) {
  geometry.validate();
  const auto kind = parity == Parity::dirichlet ? FamilyKind::resonator_dirichlet
                                                : FamilyKind::resonator_neumann;
  return make_family(kind, -geometry.b, 0.0, count);
}

Eigen::VectorXd axial_guide(double k, const ModeFamily& guide) {
  if (guide.kind != FamilyKind::guide) throw DomainError("axial_guide needs the guide family");
  if (guide.count < 2) throw DomainError("axial_guide needs at least two guide modes");
  const double k2 = k * k;
  const double lam1 = guide.eigenvalues[0];
  const double lam2 = guide.eigenvalues[1];
  if (!(lam1 < k2 && k2 < lam2)) {
    throw BandError("k = " + std::to_string(k) + " outside single-mode band (" +
                    std::to_string(std::sqrt(lam1)) + ", " + std::to_string(std::sqrt(lam2)) +
                    ")");
  }
  Eigen::VectorXd gamma(guide.count);
  gamma[0] = std::sqrt(k2 - lam1);
  for (int n = 1; n < guide.count; ++n) gamma[n] = std::sqrt(guide.eigenvalues[n] - k2);
  return gamma;
}

ResonatorAxial resonator_axial(double k, double mu, double a) noexcept {
  ResonatorAxial r;
  const double d = k * k - mu;
  if (d > 0.0) {
    r.regime = AxialRegime::oscillatory;
    r.beta = std::sqrt(d);
    r.sin_ba = std::sin(r.beta * a);
    if (std::abs(r.sin_ba) < singularity_tolerance) {
      r.singular = true;
      r.tau = std::numeric_limits<double>::infinity();
    } else {
      r.tau = x_cot_x(r.beta * a) / a;
    }
  } else if (d < 0.0) {
    r.regime = AxialRegime::evanescent;
    r.beta = std::sqrt(-d);
    r.tau = r.beta * a > coth_saturation ? r.beta : x_coth_x(r.beta * a) / a;
  } else {
    r.regime = AxialRegime::cutoff;
    r.tau = 1.0 / a;
  }
  return r;
}

double axial_resonator_coeff(double k, double mu, double a) {
  if (!(a > 0.0) || !(mu > 0.0)) throw DomainError("axial_resonator_coeff needs a > 0, mu > 0");
  const ResonatorAxial r = resonator_axial(k, mu, a);
  if (r.singular) {
    throw SingularFrequencyError(
        "closed-resonator eigenfrequency: |sin(beta a)| < 1e-10 at k = " + std::to_string(k), 0);
  }
  return r.tau;
}

AxialSpectrum axial_spectrum(double k, const ModeFamily& guide, const ModeFamily& resonator,
                             double a) {
  AxialSpectrum s;
  s.k = k;
  s.gamma = axial_guide(k, guide);
  s.resonator.reserve(resonator.count);
  for (int n = 0; n < resonator.count; ++n)
    s.resonator.push_back(resonator_axial(k, resonator.eigenvalues[n], a));
  return s;
}

double overlap(const ModeFamily& family_i, int index_i, const ModeFamily& family_j, int index_j,
               double lo, double hi) {
  if (!(lo <= hi)) throw DomainError("overlap: empty interval");
  if (!family_i.supports(lo, hi) || !family_j.supports(lo, hi))
    throw DomainError("overlap: interval outside family support");
  if (index_i < 1 || index_i > family_i.count || index_j < 1 || index_j > family_j.count)
    throw DomainError("overlap: mode index out of range");
  const double ki = family_i.wavenumber(index_i);
  const double kj = family_j.wavenumber(index_j);
  return family_i.amplitude() * family_j.amplitude() *
         sine_product_integral(ki, -ki * family_i.lo, kj, -kj * family_j.lo, lo, hi);
}

}  // namespace resonomatch::modal
