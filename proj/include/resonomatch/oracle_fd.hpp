#pragma once

#include <complex>
#include <string>
#include <vector>

#include "resonomatch/geometry.hpp"

namespace resonomatch::oracle_fd {

using cdouble = std::complex<double>;

// Uniform grid for the half problem. The geometry is snapped to multiples of
// `snap` (defaults to h), which must itself be an integer multiple of h.
struct FDGrid {
  double h = 1.0 / 128.0;
  double L = 2.0;
  int n_dtn = 30;
  double snap = 0.0;
  // Close the aperture completely (rigid-wall check); skips the resolution rule.
  bool closed_aperture = false;
};

enum class NodeKind : unsigned char { outside, interior, wall, cut, radiation };

// Node indices: y = iy h, z = jz h. Guide planes jz = -NL..-1, the aperture
// plane jz = 0, resonator planes jz = 1..NA-1, back wall jz = NA.
struct FDLayout {
  double h = 0.0;
  Parity parity = Parity::dirichlet;
  Geometry snapped;
  int guide_lo = 0, guide_hi = 0;  // wall indices of the guide strip
  int hole_lo = 0, hole_hi = 0;    // aperture edge indices (walls)
  int res_lo = 0;                  // -round(b/h)
  int nl = 0;                      // guide planes
  int na = 0;                      // round(a/h)
  bool closed = false;

  NodeKind kind(int iy, int jz) const;
  bool unknown(int iy, int jz) const {
    const NodeKind k = kind(iy, jz);
    return k == NodeKind::interior || k == NodeKind::radiation ||
           (k == NodeKind::cut && parity == Parity::neumann);
  }
  int aperture_nodes() const { return closed ? 0 : hole_hi - hole_lo - 1; }
  int guide_nodes() const { return guide_hi - guide_lo - 1; }
};

Geometry snap_geometry(const Geometry& geometry, double step);
FDLayout make_layout(const Geometry& geometry, Parity parity, const FDGrid& grid);

struct FDResult {
  cdouble r1;
  double h = 0.0;
  double L = 0.0;
  int n_dtn = 0;
  Geometry snapped;
  int unknowns = 0;
  int aperture_nodes = 0;
  double gamma1_discrete = 0.0;
  double residual = 0.0;  // ||A u - f|| / ||f||
};

// Second-order finite differences, block elimination over z-planes, exact
// discrete modal radiation condition at z = -L on the scattered field.
// Throws BandError, ResolutionError (< 8 aperture nodes), GuideLengthError.
FDResult fd_solve_half(const Geometry& geometry, double k, Parity parity, const FDGrid& grid = {});

struct Convergence {
  std::vector<double> h;
  std::vector<cdouble> r1;
  cdouble extrapolated;    // order-2 Richardson from the two finest grids
  double observed_order = 0.0;
  bool monotone = true;    // successive differences shrink
  std::string warning;     // non-empty when inconclusive
};

// Pure post-processing of a refinement sequence in geometric progression.
Convergence richardson(const std::vector<double>& h, const std::vector<cdouble>& r1);

// Runs fd_solve_half for each h with the geometry snapped to the coarsest h,
// so all grids see the same shape.
Convergence fd_convergence(const Geometry& geometry, double k, Parity parity,
                           const std::vector<double>& h_list, double L = 2.0, int n_dtn = 30);

}  // namespace resonomatch::oracle_fd
