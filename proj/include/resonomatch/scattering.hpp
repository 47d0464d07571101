#pragma once

#include <Eigen/Core>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "resonomatch/aperture.hpp"
#include "resonomatch/geometry.hpp"

namespace resonomatch::scattering {

using cdouble = std::complex<double>;

// Coupling tables for both parities of one (geometry, truncation) pair.
// Cheap to copy; the tables are shared and immutable.
struct Model {
  Geometry geometry;
  Truncation truncation;
  std::shared_ptr<const aperture::CouplingTable> dirichlet;
  std::shared_ptr<const aperture::CouplingTable> neumann;

  const std::shared_ptr<const aperture::CouplingTable>& table(Parity parity) const noexcept {
    return parity == Parity::dirichlet ? dirichlet : neumann;
  }
};

Model make_model(const Geometry& geometry, const Truncation& truncation = {});

struct HalfSolution {
  std::shared_ptr<const aperture::CouplingTable> table;
  Parity parity = Parity::dirichlet;
  double k = 0.0;
  Eigen::VectorXcd phi;        // aperture trace in the orthonormal basis
  cdouble r1;
  Eigen::VectorXcd r_evan;     // r_n, entry n-2 for n = 2..N_guide
  Eigen::VectorXcd res_trace;  // (phi, chi_n), entry n-1
  Eigen::VectorXcd c_res;      // c_n of the sin / sinh representation, entry n-1
  std::vector<modal::ResonatorAxial> resonator_axial;
  Eigen::VectorXd gamma;
  double unitarity_residual = 0.0;  // | |r1|^2 - 1 |
  double vnorm = 0.0;
};

// Direct complex LU of M = A + s_psi g g^T + tau_1 h h^T (+ negative resonator
// channels). Throws SingularFrequencyError(1) at a tau_1 pole.
HalfSolution solve_half(const aperture::GalerkinSystem& system);
HalfSolution solve_half(const Model& model, double k, Parity parity);
HalfSolution solve_half(const Geometry& geometry, double k, Parity parity,
                        const Truncation& truncation);

// Same contract through the low-rank reduction: one Cholesky of A and an
// m x m system in the channel amplitudes (m = 2 unless some tau_n < 0).
// Throws NearSingularReductionError when the reduced determinant vanishes.
HalfSolution solve_half_woodbury(const aperture::GalerkinSystem& system);
HalfSolution solve_half_woodbury(const Model& model, double k, Parity parity);
HalfSolution solve_half_woodbury(const Geometry& geometry, double k, Parity parity,
                                 const Truncation& truncation);

// Two-channel reduction in closed form: returns ((u, psi_1), (u, chi_1)).
std::pair<cdouble, cdouble> reduce_two_channel(const aperture::QuadForms& q, double gamma1,
                                               double tau1);

struct FullScattering {
  double k = 0.0;
  cdouble r1;
  cdouble t1;
  cdouble r1_D;
  cdouble r1_N;
  double energy_residual = 0.0;  // | |r1|^2 + |t1|^2 - 1 |
};

FullScattering combine(const HalfSolution& sol_D, const HalfSolution& sol_N);
FullScattering combine(cdouble r1_D, cdouble r1_N, double k = 0.0);
FullScattering solve_full(const Model& model, double k);

struct GridSpec {
  int ny = 200;
  int nz = 300;
  double y_lo = -1.0;
  double y_hi = 1.0;
  double z_lo = -2.0;
  double z_hi = 1.0;
};

enum class Region : unsigned char { outside, guide, mirror_guide, resonator };

struct FieldMap {
  std::vector<double> y;
  std::vector<double> z;
  Eigen::MatrixXcd values;  // ny x nz, zero where masked
  std::vector<Region> region;  // row-major ny x nz
  std::string tag;  // "dirichlet", "neumann" or "combined"

  Region region_at(int i, int j) const { return region[static_cast<size_t>(i) * z.size() + j]; }
  bool in_domain(int i, int j) const { return region_at(i, j) != Region::outside; }
};

// Half-problem field on its half-domain y <= 0, extended to y > 0 by the odd
// (Dirichlet) or even (Neumann) reflection.
FieldMap field_map(const HalfSolution& solution, const GridSpec& grid);

// Full two-guide field 1/2 (u^N + u^D) for y < 0 and 1/2 (u^N - u^D)(-y) for y > 0.
FieldMap field_map(const HalfSolution& sol_D, const HalfSolution& sol_N, const GridSpec& grid);

// Pointwise evaluation of one half solution at (y, z) with y <= 0. Returns 0
// outside the half domain.
cdouble evaluate(const HalfSolution& solution, double y, double z);

// Which part of the full domain (y, z) belongs to; boundaries count as inside.
Region classify(const Geometry& geometry, double y, double z);

}  // namespace resonomatch::scattering
