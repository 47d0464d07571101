#include "resonomatch/geometry.hpp"

#include <cmath>
#include <numbers>

#include "resonomatch/errors.hpp"

namespace resonomatch {

std::string_view to_string(Parity parity) noexcept {
  return parity == Parity::dirichlet ? "dirichlet" : "neumann";
}

Parity parse_parity(std::string_view text) {
  if (text == "dirichlet" || text == "D") return Parity::dirichlet;
  if (text == "neumann" || text == "N") return Parity::neumann;
  throw DomainError("unknown parity '" + std::string(text) + "' (expected dirichlet|neumann)");
}

void Geometry::validate() const {
  auto fail = [](const char* what) { throw DomainError(std::string("geometry: ") + what); };
  if (!(a > 0.0)) fail("a > 0 violated");
  if (!(b > 0.0)) fail("b > 0 violated");
  if (!(-b <= guide_lo)) fail("-b <= guide_lo violated");
  if (!(guide_lo < hole_lo)) fail("guide_lo < hole_lo violated");
  if (!(hole_lo < hole_hi)) fail("hole_lo < hole_hi violated");
  if (!(hole_hi < guide_hi)) fail("hole_hi < guide_hi violated");
  if (!(guide_hi < 0.0)) fail("guide_hi < 0 violated");
  if (!(hole_lo > -b)) fail("hole_lo > -b violated");
}

Geometry Geometry::with_hole_width(double width) const {
  Geometry g = *this;
  const double mid = hole_mid();
  g.hole_lo = mid - 0.5 * width;
  g.hole_hi = mid + 0.5 * width;
  return g;
}

Band single_mode_band(const Geometry& geometry) {
  const double w = geometry.guide_width();
  return {std::numbers::pi / w, 2.0 * std::numbers::pi / w};
}

void require_in_band(const Geometry& geometry, double k) {
  const Band band = single_mode_band(geometry);
  if (!band.contains(k)) {
    throw BandError("k = " + std::to_string(k) + " outside single-mode band (" +
                    std::to_string(band.lo) + ", " + std::to_string(band.hi) + ")");
  }
}

double closed_resonator_frequency(const Geometry& geometry) {
  const double pi = std::numbers::pi;
  const double mu1 = (pi / geometry.b) * (pi / geometry.b);
  return std::sqrt(mu1 + (pi / geometry.a) * (pi / geometry.a));
}

int recommended_modes(const Geometry& geometry, int p_aperture) {
  return static_cast<int>(
      std::ceil(10.0 * p_aperture * geometry.guide_width() / geometry.hole_width()));
}

bool satisfies_truncation_rule(const Geometry& geometry, const Truncation& truncation) {
  const int n = recommended_modes(geometry, truncation.p_aperture);
  return truncation.n_guide >= n && truncation.n_res >= n;
}

void validate(const Truncation& truncation) {
  if (truncation.n_guide < 2) throw DomainError("truncation: n_guide >= 2 required");
  if (truncation.n_res < 2) throw DomainError("truncation: n_res >= 2 required");
  if (truncation.p_aperture < 1) throw DomainError("truncation: p_aperture >= 1 required");
}

}  // namespace resonomatch
