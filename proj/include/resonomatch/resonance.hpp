#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "resonomatch/geometry.hpp"
#include "resonomatch/scattering.hpp"

namespace resonomatch::resonance {

using cdouble = std::complex<double>;

namespace flag {
inline constexpr unsigned shifted = 1u;      // moved off a closed-resonator pole
inline constexpr unsigned phase_gap = 2u;    // unresolved 2 pi phase jump between rows
}  // namespace flag

struct SpectrumRow {
  double k = 0.0;
  cdouble r1_D, r1_N, r1, t1;
  double abs_r1 = 0.0;
  double abs_t1 = 0.0;
  double phase_D = 0.0;  // arg r1^D, unwrapped along the sweep
  double energy_residual = 0.0;
  double unitarity_D = 0.0;
  double unitarity_N = 0.0;
  double resonance_function = 0.0;  // Dirichlet; changes sign where r1^D = +1
  unsigned flags = 0;
};

// Frequencies sqrt(mu_n + (j pi / a)^2) inside the band at which some tau_n
// is singular, for the given parity (both when parity is not set).
std::vector<double> closed_resonator_poles(const Geometry& geometry, const Truncation& truncation,
                                           const Band& band, const Parity* parity = nullptr);

// Moves k by 1e-8 away from any pole closer than 1e-8. Returns true if moved.
bool avoid_poles(double& k, const std::vector<double>& poles);

// Uniform grid of n_points over [band.lo, band.hi], both parities per point.
// workers <= 0 means hardware concurrency. Rows are identical for any worker
// count.
std::vector<SpectrumRow> sweep(const scattering::Model& model, const Band& band, int n_points,
                               int workers = 0);
std::vector<SpectrumRow> sweep(const Geometry& geometry, const Band& band, int n_points,
                               const Truncation& truncation, int workers = 0);

// Real function whose sign changes are exactly the points where the real
// part of the matching operator (psi_1 coefficient -gamma_1) is singular,
// i.e. where r1 = +1. Finite at tau poles.
double resonance_function(const aperture::GalerkinSystem& system);
double resonance_function(const scattering::Model& model, double k, Parity parity);

// det(I + S G) of the channel reduction; for two channels
// (1 + s_psi alpha)(1 + tau_1 delta) - s_psi tau_1 sigma^2.
cdouble determinant(const aperture::GalerkinSystem& system);
cdouble determinant(const scattering::Model& model, double k);
cdouble determinant(const Geometry& geometry, double k, const Truncation& truncation);

struct ResonanceReport {
  double hole_width = 0.0;
  double k_star = 0.0;           // r1^D = +1
  double k_closed = 0.0;
  double min_abs_r1 = 0.0;       // |r1| minimised inside the resonance window
  double k_min_abs_r1 = 0.0;
  double abs_r1_at_kstar = 0.0;
  cdouble t1_at_kstar;
  cdouble r1_D_at_kstar;
  double determinant_root = 0.0; // local minimum of |det| next to k_star
  double resonance_width = 0.0;  // extent of |t1| >= 0.7 around k_star
  double width_lo = 0.0;
  double width_hi = 0.0;
};

// Brent root finding to |dk| <= tol on [lo, hi]; f(lo), f(hi) must differ in
// sign (DomainError otherwise).
double brent_root(const std::function<double(double)>& f, double lo, double hi,
                  double tol = 1e-10, int max_iter = 200);

// Golden-section minimum of f on [lo, hi].
double golden_minimum(const std::function<double(double)>& f, double lo, double hi,
                      double tol = 1e-12);

ResonanceReport find_resonance(const scattering::Model& model, const Band& band);
ResonanceReport find_resonance(const Geometry& geometry, const Band& band,
                               const Truncation& truncation);

struct AsymptoticRow {
  double hole_width = 0.0;
  int n_modes = 0;  // n_guide = n_res used
  ResonanceReport report;
  double shift = 0.0;  // k_closed - k_star
  double alpha = 0.0;  // at k_closed
  double delta = 0.0;
};

// One hole-width per row, recentered at the base midpoint. Mode counts are
// raised to the truncation rule when below it.
std::vector<AsymptoticRow> asymptotic_study(const Geometry& base, const std::vector<double>& widths,
                                            const Band& band, const Truncation& truncation);

}  // namespace resonomatch::resonance
