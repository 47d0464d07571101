#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "resonomatch/geometry.hpp"
#include "resonomatch/modal.hpp"

namespace resonomatch::aperture {

// Orthonormal basis for the aperture trace u|_D.
//
// The raw functions are sin(q arccos t), t = (y - mid) / hw, which vanish
// like sqrt(distance) at both edges of the slit, matching the edge
// behaviour of the true field. They are orthonormalized through the
// closed-form Gram matrix: b = T * raw with T = L^{-1}, G = L L^T.
struct ApertureBasis {
  int size = 0;
  double lo = 0.0;
  double hi = 0.0;
  Eigen::MatrixXd gram;          // raw Gram matrix over D
  Eigen::MatrixXd to_orthonormal;  // T, lower triangular

  double half_width() const noexcept { return 0.5 * (hi - lo); }
  double mid() const noexcept { return 0.5 * (lo + hi); }

  double raw_value(int q, double y) const noexcept;
  // Orthonormal basis function b_p(y), 1-based, zero outside D.
  double value(int p, double y) const noexcept;
  // Trace phi(y) = sum_p coeffs[p-1] b_p(y).
  template <typename Derived>
  typename Derived::Scalar trace(const Eigen::MatrixBase<Derived>& coeffs, double y) const;
};

ApertureBasis make_aperture_basis(double lo, double hi, int size);

// Closed-form overlaps (b_p, mode_n)_{L2(D)}, P x family.count.
Eigen::MatrixXd coupling_matrix(const ApertureBasis& basis, const modal::ModeFamily& family);

// Asymptotic sum over the omitted modes n > N of coeff_n (b_p, mode_n)(b_q, mode_n),
// using coeff_n ~ kappa_n. Orthonormal basis, P x P, positive semidefinite.
Eigen::MatrixXd tail_matrix(const ApertureBasis& basis, const modal::ModeFamily& family);

// psi_1(x) = sum_{n >= 0} 1/(x+n)^2 for x > 0.
double trigamma(double x);

// k-independent part of the Galerkin system: basis, mode families and all
// overlaps. Build once per (geometry, parity, truncation) and share.
struct CouplingTable {
  Geometry geometry;
  Parity parity = Parity::dirichlet;
  Truncation truncation;
  ApertureBasis basis;
  modal::ModeFamily guide;
  modal::ModeFamily resonator;
  Eigen::MatrixXd guide_coupling;     // P x n_guide
  Eigen::MatrixXd resonator_coupling; // P x n_res
  Eigen::MatrixXd tail;               // P x P, zero when tail_correction is off
};

std::shared_ptr<const CouplingTable> make_coupling_table(const Geometry& geometry, Parity parity,
                                                         const Truncation& truncation);

// Galerkin matrix of the positive part A of the matching operator at one k,
// plus the data needed to add the rank-one channels back.
//
// A = gamma_1 g g^T + sum_{n>=2} gamma_n g_n g_n^T + sum_{n>=2, tau_n>=0} tau_n h_n h_n^T
//     (+ tail). Resonator modes n >= 2 with tau_n < 0 are carried as extra
// channels so A stays symmetric positive definite.
struct GalerkinSystem {
  double k = 0.0;
  std::shared_ptr<const CouplingTable> table;
  Eigen::MatrixXd A;
  Eigen::VectorXd g_psi;  // (b_p, psi_1)
  Eigen::VectorXd g_chi;  // (b_p, chi_1)
  Eigen::VectorXd gamma;  // gamma_n, entry n-1
  std::vector<modal::ResonatorAxial> resonator_axial;
  double gamma1 = 0.0;
  double tau1 = 0.0;
  bool tau1_singular = false;
  std::vector<int> extra_modes;  // 1-based resonator indices carried outside A

  Parity parity() const noexcept { return table->parity; }
  const Truncation& truncation() const noexcept { return table->truncation; }
  int size() const noexcept { return static_cast<int>(A.rows()); }
};

GalerkinSystem assemble(const std::shared_ptr<const CouplingTable>& table, double k);
GalerkinSystem assemble(const Geometry& geometry, double k, Parity parity,
                        const Truncation& truncation);

struct QuadForms {
  double alpha = 0.0;  // (A^{-1} psi_1, psi_1)
  double delta = 0.0;  // (A^{-1} chi_1, chi_1)
  double sigma = 0.0;  // (A^{-1} psi_1, chi_1)
};

// One Cholesky factorization of A, two solves. Throws NotSpdError.
QuadForms quad_forms(const GalerkinSystem& system);

// |phi|^2 + phi^H A phi (basis orthonormal on D).
double v_norm(const GalerkinSystem& system, const Eigen::VectorXcd& phi);

// Rank-one channels added back to A to form the matching operator:
// column 0 is psi_1 with coefficient -i gamma_1 - gamma_1, column 1 is chi_1
// with tau_1, further columns are the extra resonator modes with tau_n.
struct ChannelSet {
  Eigen::MatrixXd couplings;          // P x m
  Eigen::VectorXcd coefficients;      // m
  std::vector<int> resonator_modes;   // mode index of columns 1..m-1
  Eigen::MatrixXd gram;               // C^T A^{-1} C, m x m
};

// Throws NotSpdError. At a tau_1 pole the chi_1 coefficient is +inf.
ChannelSet channel_set(const GalerkinSystem& system);

template <typename Derived>
typename Derived::Scalar ApertureBasis::trace(const Eigen::MatrixBase<Derived>& coeffs,
                                              double y) const {
  typename Derived::Scalar sum(0);
  if (!(lo < y && y < hi)) return sum;
  for (int p = 1; p <= size; ++p) sum += coeffs[p - 1] * value(p, y);
  return sum;
}

}  // namespace resonomatch::aperture
