#include "resonomatch/scattering.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <string>

#include "resonomatch/errors.hpp"

namespace resonomatch::scattering {

namespace {
constexpr cdouble I{0.0, 1.0};

void require_regular_tau1(const aperture::GalerkinSystem& system) {
  if (system.tau1_singular) {
    throw SingularFrequencyError(
        "closed-resonator eigenfrequency of resonator mode 1 at k = " + std::to_string(system.k),
        1);
  }
}

// Fills every derived field of a solution from the aperture trace.
HalfSolution finish(const aperture::GalerkinSystem& system, Eigen::VectorXcd phi) {
  const auto& t = *system.table;
  HalfSolution s;
  s.table = system.table;
  s.parity = t.parity;
  s.k = system.k;
  s.gamma = system.gamma;
  s.resonator_axial = system.resonator_axial;

  const Eigen::VectorXcd guide_trace = t.guide_coupling.transpose().cast<cdouble>() * phi;
  s.r1 = guide_trace[0] - 1.0;
  s.r_evan = guide_trace.tail(guide_trace.size() - 1);
  s.res_trace = t.resonator_coupling.transpose().cast<cdouble>() * phi;

  const double a = t.geometry.a;
  s.c_res.resize(s.res_trace.size());
  for (Eigen::Index n = 0; n < s.res_trace.size(); ++n) {
    const auto& ax = s.resonator_axial[n];
    double denom;
    switch (ax.regime) {
      case modal::AxialRegime::oscillatory: denom = ax.sin_ba; break;
      case modal::AxialRegime::cutoff: denom = a; break;
      default: denom = std::sinh(ax.beta * a); break;
    }
    s.c_res[n] = -s.res_trace[n] / denom;
  }
  s.unitarity_residual = std::abs(std::norm(s.r1) - 1.0);
  s.vnorm = aperture::v_norm(system, phi);
  s.phi = std::move(phi);
  return s;
}

// Resonator axial profile u_n(z) / u_n(0), bounded for any beta a.
double resonator_profile(const modal::ResonatorAxial& ax, double a, double z) {
  switch (ax.regime) {
    case modal::AxialRegime::oscillatory:
      return std::sin(ax.beta * (a - z)) / ax.sin_ba;
    case modal::AxialRegime::cutoff:
      return (a - z) / a;
    default:
      return std::exp(-ax.beta * z) * (-std::expm1(-2.0 * ax.beta * (a - z))) /
             (-std::expm1(-2.0 * ax.beta * a));
  }
}
}  // namespace

Model make_model(const Geometry& geometry, const Truncation& truncation) {
  Model m;
  m.geometry = geometry;
  m.truncation = truncation;
  m.dirichlet = aperture::make_coupling_table(geometry, Parity::dirichlet, truncation);
  m.neumann = aperture::make_coupling_table(geometry, Parity::neumann, truncation);
  return m;
}

HalfSolution solve_half(const aperture::GalerkinSystem& system) {
  require_regular_tau1(system);
  const auto ch = aperture::channel_set(system);
  Eigen::MatrixXcd m = system.A.cast<cdouble>();
  for (Eigen::Index j = 0; j < ch.couplings.cols(); ++j) {
    const Eigen::VectorXd c = ch.couplings.col(j);
    m += ch.coefficients[j] * (c * c.transpose()).cast<cdouble>();
  }
  const Eigen::VectorXcd rhs = (-2.0 * I * system.gamma1) * system.g_psi.cast<cdouble>();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  return finish(system, lu.solve(rhs));
}

HalfSolution solve_half(const Model& model, double k, Parity parity) {
  return solve_half(aperture::assemble(model.table(parity), k));
}

HalfSolution solve_half(const Geometry& geometry, double k, Parity parity,
                        const Truncation& truncation) {
  return solve_half(aperture::assemble(geometry, k, parity, truncation));
}

HalfSolution solve_half_woodbury(const aperture::GalerkinSystem& system) {
  require_regular_tau1(system);
  Eigen::LLT<Eigen::MatrixXd> llt(system.A);
  if (llt.info() != Eigen::Success)
    throw NotSpdError("Galerkin matrix A is not positive definite at k = " +
                      std::to_string(system.k));
  const auto ch = aperture::channel_set(system);

  // Channels with a zero coefficient drop out exactly.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < ch.coefficients.size(); ++j)
    if (ch.coefficients[j] != 0.0) keep.push_back(j);
  const auto m = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd c(system.size(), m);
  Eigen::VectorXcd s(m);
  Eigen::MatrixXd g(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    c.col(a) = ch.couplings.col(keep[a]);
    s[a] = ch.coefficients[keep[a]];
    for (Eigen::Index b = 0; b < m; ++b) g(a, b) = ch.gram(keep[a], keep[b]);
  }

  // With x = C^T phi:  (I + G S) x = C^T A^{-1} rhs,  phi = A^{-1}(rhs - C S x).
  const Eigen::MatrixXd w = llt.solve(c);
  const Eigen::VectorXd u = llt.solve(system.g_psi);
  const cdouble scale = -2.0 * I * system.gamma1;
  Eigen::MatrixXcd reduced = Eigen::MatrixXcd::Identity(m, m) + g.cast<cdouble>() * s.asDiagonal();
  const Eigen::VectorXcd proj = scale * (c.transpose() * u).cast<cdouble>();

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(reduced);
  double hadamard = 1.0;
  for (Eigen::Index j = 0; j < m; ++j) hadamard *= reduced.col(j).norm();
  if (std::abs(lu.determinant()) < 1e-14 * hadamard) {
    throw NearSingularReductionError("reduced channel system is singular at k = " +
                                     std::to_string(system.k) + " (resonance-adjacent)");
  }
  const Eigen::VectorXcd x = lu.solve(proj);
  Eigen::VectorXcd phi = scale * u.cast<cdouble>() - w.cast<cdouble>() * (s.asDiagonal() * x);
  return finish(system, std::move(phi));
}

HalfSolution solve_half_woodbury(const Model& model, double k, Parity parity) {
  return solve_half_woodbury(aperture::assemble(model.table(parity), k));
}

HalfSolution solve_half_woodbury(const Geometry& geometry, double k, Parity parity,
                                 const Truncation& truncation) {
  return solve_half_woodbury(aperture::assemble(geometry, k, parity, truncation));
}

std::pair<cdouble, cdouble> reduce_two_channel(const aperture::QuadForms& q, double gamma1,
                                               double tau1) {
  const cdouble s_psi(-gamma1, -gamma1);
  const cdouble rhs = -2.0 * I * gamma1;
  if (q.sigma == 0.0) {
    const cdouble x = rhs * q.alpha / (1.0 + s_psi * q.alpha);
    return {x, 0.0};
  }
  Eigen::Matrix2cd m;
  m << 1.0 + s_psi * q.alpha, tau1 * q.sigma, s_psi * q.sigma, 1.0 + tau1 * q.delta;
  const Eigen::Vector2cd b(rhs * q.alpha, rhs * q.sigma);
  const Eigen::Vector2cd x = m.partialPivLu().solve(b);
  return {x[0], x[1]};
}

FullScattering combine(cdouble r1_D, cdouble r1_N, double k) {
  FullScattering f;
  f.k = k;
  f.r1_D = r1_D;
  f.r1_N = r1_N;
  f.r1 = 0.5 * (r1_D + r1_N);
  f.t1 = 0.5 * (r1_N - r1_D);
  f.energy_residual = std::abs(std::norm(f.r1) + std::norm(f.t1) - 1.0);
  return f;
}

FullScattering combine(const HalfSolution& sol_D, const HalfSolution& sol_N) {
  if (sol_D.parity != Parity::dirichlet || sol_N.parity != Parity::neumann)
    throw DomainError("combine: expected a Dirichlet and a Neumann solution");
  if (sol_D.k != sol_N.k)
    throw DomainError("combine: frequencies differ (" + std::to_string(sol_D.k) + " vs " +
                      std::to_string(sol_N.k) + ")");
  return combine(sol_D.r1, sol_N.r1, sol_D.k);
}

FullScattering solve_full(const Model& model, double k) {
  return combine(solve_half(model, k, Parity::dirichlet), solve_half(model, k, Parity::neumann));
}

Region classify(const Geometry& g, double y, double z) {
  const double ym = y > 0.0 ? -y : y;
  if (z <= 0.0 && g.guide_lo <= ym && ym <= g.guide_hi)
    return y > 0.0 ? Region::mirror_guide : Region::guide;
  if (z > 0.0 && z <= g.a && -g.b <= ym) return Region::resonator;
  return Region::outside;
}

cdouble evaluate(const HalfSolution& s, double y, double z) {
  const auto& t = *s.table;
  const Geometry& g = t.geometry;
  if (y > 0.0 || classify(g, y, z) == Region::outside) return 0.0;
  if (z <= 0.0) {
    const double g1 = s.gamma[0];
    cdouble u = (std::exp(I * g1 * z) + s.r1 * std::exp(-I * g1 * z)) * t.guide.value(1, y);
    for (int n = 2; n <= t.guide.count; ++n)
      u += s.r_evan[n - 2] * std::exp(s.gamma[n - 1] * z) * t.guide.value(n, y);
    return u;
  }
  cdouble u = 0.0;
  for (int n = 1; n <= t.resonator.count; ++n)
    u += s.res_trace[n - 1] * resonator_profile(s.resonator_axial[n - 1], g.a, z) *
         t.resonator.value(n, y);
  return u;
}

namespace {
std::vector<double> axis(double lo, double hi, int count) {
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i)
    v[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  return v;
}

// Half field on reflected coordinates ym = -|y|, all grid points at once.
// The modal sums are evaluated as (modes in y) x (profiles in z) products.
Eigen::MatrixXcd half_field(const HalfSolution& s, const std::vector<double>& y,
                            const std::vector<double>& z) {
  const auto& t = *s.table;
  const Geometry& g = t.geometry;
  const auto ny = static_cast<Eigen::Index>(y.size());
  const auto nz = static_cast<Eigen::Index>(z.size());
  const int ng = t.guide.count;
  const int nr = t.resonator.count;

  Eigen::MatrixXd ug(ny, ng), ur(ny, nr);
  for (Eigen::Index i = 0; i < ny; ++i) {
    const double ym = y[i] > 0.0 ? -y[i] : y[i];
    for (int n = 1; n <= ng; ++n) ug(i, n - 1) = t.guide.value(n, ym);
    for (int n = 1; n <= nr; ++n) ur(i, n - 1) = t.resonator.value(n, ym);
  }
  Eigen::MatrixXcd zg = Eigen::MatrixXcd::Zero(ng, nz), zr = Eigen::MatrixXcd::Zero(nr, nz);
  const double g1 = s.gamma[0];
  for (Eigen::Index j = 0; j < nz; ++j) {
    const double zz = z[j];
    if (zz <= 0.0) {
      zg(0, j) = std::exp(I * g1 * zz) + s.r1 * std::exp(-I * g1 * zz);
      for (int n = 2; n <= ng; ++n) zg(n - 1, j) = s.r_evan[n - 2] * std::exp(s.gamma[n - 1] * zz);
    } else if (zz <= g.a) {
      for (int n = 1; n <= nr; ++n)
        zr(n - 1, j) = s.res_trace[n - 1] * resonator_profile(s.resonator_axial[n - 1], g.a, zz);
    }
  }
  Eigen::MatrixXcd guide_part = ug.cast<cdouble>() * zg;
  Eigen::MatrixXcd res_part = ur.cast<cdouble>() * zr;
  Eigen::MatrixXcd out(ny, nz);
  for (Eigen::Index i = 0; i < ny; ++i)
    for (Eigen::Index j = 0; j < nz; ++j)
      out(i, j) = z[j] <= 0.0 ? guide_part(i, j) : res_part(i, j);
  return out;
}

FieldMap empty_map(const Geometry& g, const GridSpec& grid) {
  if (grid.ny < 1 || grid.nz < 1) throw DomainError("field grid needs ny, nz >= 1");
  FieldMap f;
  f.y = axis(grid.y_lo, grid.y_hi, grid.ny);
  f.z = axis(grid.z_lo, grid.z_hi, grid.nz);
  f.region.resize(static_cast<size_t>(grid.ny) * grid.nz);
  for (int i = 0; i < grid.ny; ++i)
    for (int j = 0; j < grid.nz; ++j)
      f.region[static_cast<size_t>(i) * grid.nz + j] = classify(g, f.y[i], f.z[j]);
  return f;
}
}  // namespace

FieldMap field_map(const HalfSolution& s, const GridSpec& grid) {
  FieldMap f = empty_map(s.table->geometry, grid);
  f.tag = std::string(to_string(s.parity));
  const Eigen::MatrixXcd u = half_field(s, f.y, f.z);
  const double mirror = s.parity == Parity::dirichlet ? -1.0 : 1.0;
  f.values = Eigen::MatrixXcd::Zero(grid.ny, grid.nz);
  for (int i = 0; i < grid.ny; ++i)
    for (int j = 0; j < grid.nz; ++j)
      if (f.in_domain(i, j)) f.values(i, j) = f.y[i] > 0.0 ? mirror * u(i, j) : u(i, j);
  return f;
}

FieldMap field_map(const HalfSolution& sol_D, const HalfSolution& sol_N, const GridSpec& grid) {
  combine(sol_D, sol_N);  // validates parities and k
  FieldMap f = empty_map(sol_D.table->geometry, grid);
  f.tag = "combined";
  const Eigen::MatrixXcd ud = half_field(sol_D, f.y, f.z);
  const Eigen::MatrixXcd un = half_field(sol_N, f.y, f.z);
  f.values = Eigen::MatrixXcd::Zero(grid.ny, grid.nz);
  for (int i = 0; i < grid.ny; ++i)
    for (int j = 0; j < grid.nz; ++j) {
      if (!f.in_domain(i, j)) continue;
      f.values(i, j) = f.y[i] > 0.0 ? 0.5 * (un(i, j) - ud(i, j)) : 0.5 * (un(i, j) + ud(i, j));
    }
  return f;
}

}  // namespace resonomatch::scattering
