#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "resonomatch/geometry.hpp"

namespace resonomatch::modal {

enum class FamilyKind { guide, resonator_dirichlet, resonator_neumann };

// Transverse eigenmodes sqrt(2/len) sin(kappa_n (y - lo)) on (lo, hi).
//
// Indices are 1-based: mode 1 is the propagating guide mode. For the guide
// len = hi - lo and kappa_n = n pi / len. For the resonator half-section
// (-b, 0), len = b and kappa_n = n pi / b (Dirichlet cut) or
// (n - 1/2) pi / b (Neumann cut, zero slope at y = 0).
struct ModeFamily {
  FamilyKind kind = FamilyKind::guide;
  double lo = 0.0;
  double hi = 1.0;
  int count = 0;
  Eigen::VectorXd eigenvalues;  // entry n-1 holds kappa_n^2

  double length() const noexcept { return hi - lo; }
  double wavenumber(int n) const noexcept;
  double amplitude() const noexcept { return std::sqrt(2.0 / length()); }
  double value(int n, double y) const noexcept;
  double slope(int n, double y) const noexcept;
  bool supports(double y_lo, double y_hi) const noexcept { return lo <= y_lo && y_hi <= hi; }
};

ModeFamily guide_modes(const Geometry& geometry, int count);
ModeFamily resonator_half_modes(const Geometry& geometry, Parity parity, int count);

// gamma_1 = sqrt(k^2 - lambda_1); gamma_n = sqrt(lambda_n - k^2) for n >= 2.
// Entry n-1 of the result holds gamma_n. Throws BandError outside the band.
Eigen::VectorXd axial_guide(double k, const ModeFamily& guide);

enum class AxialRegime { oscillatory, cutoff, evanescent };

// Axial behaviour of one resonator mode with back wall at z = a.
struct ResonatorAxial {
  AxialRegime regime = AxialRegime::evanescent;
  double beta = 0.0;   // sqrt(|k^2 - mu|)
  double tau = 0.0;    // beta cot(beta a), 1/a, or beta coth(beta a)
  double sin_ba = 0.0; // sin(beta a) when oscillatory
  bool singular = false;
};

// |sin(beta a)| below this marks a closed-resonator eigenfrequency.
inline constexpr double singularity_tolerance = 1e-10;

// Non-throwing evaluation; singular poles are flagged and tau is left at +inf.
ResonatorAxial resonator_axial(double k, double mu, double a) noexcept;

// tau_n(k); throws SingularFrequencyError at a closed-resonator eigenfrequency.
double axial_resonator_coeff(double k, double mu, double a);

struct AxialSpectrum {
  double k = 0.0;
  Eigen::VectorXd gamma;
  std::vector<ResonatorAxial> resonator;
};

AxialSpectrum axial_spectrum(double k, const ModeFamily& guide, const ModeFamily& resonator,
                             double a);

// Exact integral over (lo, hi) of mode_i(y) * mode_j(y). Throws DomainError
// if the interval leaves either family's support.
double overlap(const ModeFamily& family_i, int index_i, const ModeFamily& family_j,
               int index_j, double lo, double hi);

// Kernels shared with the aperture module.

// sin(x)/x with the removable singularity handled.
template <typename Scalar>
Scalar sinc(Scalar x) {
  using std::abs;
  using std::sin;
  const Scalar ax = abs(x);
  if (ax < Scalar(1e-4)) {
    const Scalar x2 = x * x;
    return Scalar(1) - x2 / Scalar(6) + x2 * x2 / Scalar(120);
  }
  return sin(x) / x;
}

// Integral over (lo, hi) of cos(d y + c), evaluated as
// (hi - lo) cos(d m + c) sinc(d (hi - lo) / 2) with m the midpoint, which
// stays accurate when d -> 0.
template <typename Scalar>
Scalar cosine_integral(Scalar d, Scalar c, Scalar lo, Scalar hi) {
  using std::cos;
  const Scalar len = hi - lo;
  const Scalar mid = Scalar(0.5) * (lo + hi);
  return len * cos(d * mid + c) * sinc(Scalar(0.5) * d * len);
}

// Integral over (lo, hi) of sin(k1 y + p1) sin(k2 y + p2).
template <typename Scalar>
Scalar sine_product_integral(Scalar k1, Scalar p1, Scalar k2, Scalar p2, Scalar lo, Scalar hi) {
  return Scalar(0.5) * (cosine_integral(k1 - k2, p1 - p2, lo, hi) -
                        cosine_integral(k1 + k2, p1 + p2, lo, hi));
}

// x cot(x) and x coth(x), series near x = 0.
template <typename Scalar>
Scalar x_cot_x(Scalar x) {
  using std::abs;
  using std::tan;
  if (abs(x) < Scalar(1e-4)) {
    const Scalar x2 = x * x;
    return Scalar(1) - x2 / Scalar(3) - x2 * x2 / Scalar(45);
  }
  return x / tan(x);
}

template <typename Scalar>
Scalar x_coth_x(Scalar x) {
  using std::abs;
  using std::tanh;
  if (abs(x) < Scalar(1e-4)) {
    const Scalar x2 = x * x;
    return Scalar(1) + x2 / Scalar(3) - x2 * x2 / Scalar(45);
  }
  return x / tanh(x);
}

}  // namespace resonomatch::modal
