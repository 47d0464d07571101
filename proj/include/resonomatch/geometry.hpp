#pragma once

#include <string>
#include <string_view>
#include <utility>

namespace resonomatch {

// Cut condition on the mirror plane y = 0 for the half problem.
enum class Parity { dirichlet, neumann };

std::string_view to_string(Parity parity) noexcept;
Parity parse_parity(std::string_view text);

// Planar cross-section of two mirror-image waveguides joined to a resonator.
//
// Transverse coordinate y, axial coordinate z. The incident guide occupies
// (guide_lo, guide_hi) x (-inf, 0); the resonator half-section (-b, 0) x
// (0, a); the aperture (hole_lo, hole_hi) opens the z = 0 wall between them.
// The mirror guide is the reflection of the incident one across y = 0.
struct Geometry {
  double guide_lo = -0.95;
  double guide_hi = -0.15;
  double b = 1.0;
  double a = 1.0;
  double hole_lo = -0.65;
  double hole_hi = -0.45;

  double guide_width() const noexcept { return guide_hi - guide_lo; }
  double hole_width() const noexcept { return hole_hi - hole_lo; }
  double hole_mid() const noexcept { return 0.5 * (hole_lo + hole_hi); }

  // Throws DomainError naming the first violated invariant.
  void validate() const;

  // Same geometry with the aperture resized about its midpoint.
  Geometry with_hole_width(double width) const;

  bool operator==(const Geometry&) const = default;
};

// Open interval of frequencies.
struct Band {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double k) const noexcept { return lo < k && k < hi; }
  double width() const noexcept { return hi - lo; }
};

// (sqrt(lambda_1), sqrt(lambda_2)) of the guide cross-section.
Band single_mode_band(const Geometry& geometry);

// Throws BandError unless k lies strictly inside the single-mode band.
void require_in_band(const Geometry& geometry, double k);

// Closed-resonator eigenfrequency sqrt(mu_1 + (pi/a)^2) for the Dirichlet
// half-resonator, where beta_1 a = pi.
double closed_resonator_frequency(const Geometry& geometry);

// Modal truncation of the mode-matching system.
struct Truncation {
  int n_guide = 200;
  int n_res = 200;
  int p_aperture = 12;
  // Add the analytic asymptotic sum of the omitted modes n > N to A.
  bool tail_correction = true;

  bool operator==(const Truncation&) const = default;
};

// Rule of thumb n_guide, n_res >= 10 * P * (guide width / hole width).
int recommended_modes(const Geometry& geometry, int p_aperture);
bool satisfies_truncation_rule(const Geometry& geometry, const Truncation& truncation);

// Throws DomainError on non-positive sizes.
void validate(const Truncation& truncation);

}  // namespace resonomatch
