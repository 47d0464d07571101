#include "resonomatch/oracle_fd.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <string>

#include "resonomatch/errors.hpp"

namespace resonomatch::oracle_fd {

namespace {
constexpr double pi = std::numbers::pi;
constexpr cdouble I{0.0, 1.0};
constexpr int min_aperture_nodes = 8;

int to_index(double x, double h) { return static_cast<int>(std::lround(x / h)); }

// One z-plane of unknowns: node y-indices and the half weight of the Neumann
// cut row (rows on y = 0 are scaled by 1/2 to keep the system symmetric).
struct Plane {
  int jz = 0;
  std::vector<int> iy;
  std::vector<double> weight;
};

// Coupling of plane p to plane p+1: for each node of p, the position of the
// same iy in p+1 (or -1) and the weight of the link.
struct Link {
  std::vector<int> target;
  std::vector<double> weight;
};

Link make_link(const Plane& lower, const Plane& upper) {
  Link l;
  l.target.assign(lower.iy.size(), -1);
  l.weight.assign(lower.iy.size(), 0.0);
  size_t q = 0;
  for (size_t p = 0; p < lower.iy.size(); ++p) {
    while (q < upper.iy.size() && upper.iy[q] < lower.iy[p]) ++q;
    if (q < upper.iy.size() && upper.iy[q] == lower.iy[p]) {
      l.target[p] = static_cast<int>(q);
      l.weight[p] = lower.weight[p];
    }
  }
  return l;
}

Eigen::MatrixXd plane_block(const Plane& p, double k2h2) {
  const auto n = static_cast<Eigen::Index>(p.iy.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    d(a, a) = (k2h2 - 4.0) * p.weight[a];
    if (a + 1 < n && p.iy[a + 1] == p.iy[a] + 1) {
      d(a, a + 1) = 1.0;
      d(a + 1, a) = 1.0;
    }
  }
  return d;
}

// B^T x for the link lower -> upper, x living on the lower plane.
template <typename Vec>
Vec lift(const Link& l, const Vec& x, Eigen::Index upper_size) {
  Vec out = Vec::Zero(upper_size);
  for (size_t p = 0; p < l.target.size(); ++p)
    if (l.target[p] >= 0) out[l.target[p]] += l.weight[p] * x[p];
  return out;
}

// B x, x living on the upper plane.
template <typename Vec>
Vec lower_of(const Link& l, const Vec& x) {
  Vec out = Vec::Zero(static_cast<Eigen::Index>(l.target.size()));
  for (size_t p = 0; p < l.target.size(); ++p)
    if (l.target[p] >= 0) out[p] = l.weight[p] * x[l.target[p]];
  return out;
}
}  // namespace

NodeKind FDLayout::kind(int iy, int jz) const {
  if (jz < -nl || jz > na) return NodeKind::outside;
  if (jz < 0) {
    if (guide_lo < iy && iy < guide_hi) return jz == -nl ? NodeKind::radiation : NodeKind::interior;
    if (iy == guide_lo || iy == guide_hi) return NodeKind::wall;
    return NodeKind::outside;
  }
  if (jz == 0) {
    if (!closed && hole_lo < iy && iy < hole_hi) return NodeKind::interior;
    if ((guide_lo <= iy && iy <= guide_hi) || (res_lo <= iy && iy <= 0)) return NodeKind::wall;
    return NodeKind::outside;
  }
  if (jz < na) {
    if (res_lo < iy && iy < 0) return NodeKind::interior;
    if (iy == 0) return NodeKind::cut;
    if (iy == res_lo) return NodeKind::wall;
    return NodeKind::outside;
  }
  return res_lo <= iy && iy <= 0 ? NodeKind::wall : NodeKind::outside;
}

Geometry snap_geometry(const Geometry& g, double step) {
  if (!(step > 0.0)) throw DomainError("snap step must be positive");
  auto s = [step](double x) { return std::round(x / step) * step; };
  Geometry out;
  out.guide_lo = s(g.guide_lo);
  out.guide_hi = s(g.guide_hi);
  out.b = s(g.b);
  out.a = s(g.a);
  out.hole_lo = s(g.hole_lo);
  out.hole_hi = s(g.hole_hi);
  return out;
}

FDLayout make_layout(const Geometry& geometry, Parity parity, const FDGrid& grid) {
  geometry.validate();
  if (!(grid.h > 0.0)) throw DomainError("fd grid: h must be positive");
  if (grid.n_dtn < 1) throw DomainError("fd grid: n_dtn >= 1 required");
  const double snap = grid.snap > 0.0 ? grid.snap : grid.h;
  const double ratio = snap / grid.h;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 0.5)
    throw DomainError("fd grid: snap step must be an integer multiple of h");

  FDLayout l;
  l.h = grid.h;
  l.parity = parity;
  l.closed = grid.closed_aperture;
  l.snapped = snap_geometry(geometry, snap);
  if (!l.closed) {
    try {
      l.snapped.validate();
    } catch (const DomainError& e) {
      throw ResolutionError(std::string("fd grid too coarse for the geometry: ") + e.what());
    }
  }
  const double h = grid.h;
  l.guide_lo = to_index(l.snapped.guide_lo, h);
  l.guide_hi = to_index(l.snapped.guide_hi, h);
  l.hole_lo = to_index(l.snapped.hole_lo, h);
  l.hole_hi = to_index(l.snapped.hole_hi, h);
  l.res_lo = -to_index(l.snapped.b, h);
  l.na = to_index(l.snapped.a, h);
  l.nl = to_index(grid.L, h);
  if (std::abs(l.nl * h - grid.L) > 1e-9 * std::max(1.0, grid.L))
    throw DomainError("fd grid: L must be a multiple of h");
  if (l.na < 2 || l.nl < 2 || l.guide_nodes() < 2)
    throw ResolutionError("fd grid too coarse: fewer than two planes or guide nodes");
  if (!l.closed && l.aperture_nodes() < min_aperture_nodes) {
    throw ResolutionError("fd grid too coarse: " + std::to_string(l.aperture_nodes()) +
                          " nodes across the aperture (need >= " +
                          std::to_string(min_aperture_nodes) + ")");
  }
  return l;
}

FDResult fd_solve_half(const Geometry& geometry, double k, Parity parity, const FDGrid& grid) {
  const FDLayout lay = make_layout(geometry, parity, grid);
  const double h = lay.h;
  const Band band = single_mode_band(lay.snapped);
  if (!band.contains(k)) {
    throw BandError("k = " + std::to_string(k) + " outside single-mode band (" +
                    std::to_string(band.lo) + ", " + std::to_string(band.hi) + ")");
  }

  // Discrete guide modes: exact eigenvectors of the 3-point Laplacian.
  const int ny = lay.guide_hi - lay.guide_lo;  // intervals across the guide
  const int ng = ny - 1;
  const double w = ny * h;
  const int n_dtn = std::min(grid.n_dtn, ng);
  Eigen::MatrixXd psi(ng, n_dtn);
  Eigen::VectorXd lam(n_dtn);
  for (int n = 1; n <= n_dtn; ++n) {
    lam[n - 1] = 4.0 / (h * h) * std::pow(std::sin(n * pi * h / (2.0 * w)), 2);
    for (int i = 0; i < ng; ++i) psi(i, n - 1) = std::sqrt(2.0 / w) * std::sin(n * pi * (i + 1.0) / ny);
  }
  const double k2h2 = k * k * h * h;
  const double c1 = 1.0 - 0.5 * h * h * (k * k - lam[0]);
  if (!(std::abs(c1) < 1.0)) throw BandError("k not propagating on this grid");
  const double gamma_h = std::acos(c1) / h;

  // Ghost plane z = -L - h:  u_s(-1) = K u_s(0),  K = h sum kappa_n psi_n psi_n^T.
  Eigen::VectorXcd kappa(n_dtn);
  kappa[0] = std::exp(I * gamma_h * h);
  double slowest_omitted = std::numeric_limits<double>::infinity();
  for (int n = 2; n <= n_dtn; ++n) {
    const double c = 1.0 + 0.5 * h * h * (lam[n - 1] - k * k);
    if (!(c > 1.0)) throw BandError("second guide mode propagates on this grid");
    kappa[n - 1] = c - std::sqrt(c * c - 1.0);
  }
  if (n_dtn < ng) {
    const double lam_next = 4.0 / (h * h) * std::pow(std::sin((n_dtn + 1) * pi * h / (2.0 * w)), 2);
    const double c = 1.0 + 0.5 * h * h * (lam_next - k * k);
    slowest_omitted = std::acosh(c) / h;
  }
  if (std::exp(-slowest_omitted * grid.L) >= 1e-6) {
    throw GuideLengthError("radiation boundary omits mode " + std::to_string(n_dtn + 1) +
                           " whose decay over L is not below 1e-6; raise n_dtn or L");
  }
  const Eigen::MatrixXcd K =
      h * (psi.cast<cdouble>() * kappa.asDiagonal() * psi.transpose().cast<cdouble>());

  // Planes bottom (z = -L) to top (last resonator plane).
  std::vector<Plane> planes;
  for (int jz = -lay.nl; jz < lay.na; ++jz) {
    Plane p;
    p.jz = jz;
    const int lo = jz < 0 ? lay.guide_lo : (jz == 0 ? lay.hole_lo : lay.res_lo);
    const int hi = jz < 0 ? lay.guide_hi : (jz == 0 ? lay.hole_hi : 1);
    for (int iy = lo; iy < hi; ++iy) {
      if (!lay.unknown(iy, jz)) continue;
      p.iy.push_back(iy);
      p.weight.push_back(lay.kind(iy, jz) == NodeKind::cut ? 0.5 : 1.0);
    }
    planes.push_back(std::move(p));
  }
  const auto np = static_cast<int>(planes.size());
  std::vector<Link> links(np - 1);
  for (int p = 0; p + 1 < np; ++p) links[p] = make_link(planes[p], planes[p + 1]);

  // Backward elimination: W_p = S_p^{-1},
  // S_p = D_p - B_p W_{p+1} B_p^T. Real for every plane above the first.
  std::vector<Eigen::MatrixXd> inv(np);
  for (int p = np - 1; p >= 1; --p) {
    Eigen::MatrixXd s = plane_block(planes[p], k2h2);
    if (p + 1 < np) {
      const Link& l = links[p];
      for (size_t a = 0; a < l.target.size(); ++a) {
        if (l.target[a] < 0) continue;
        for (size_t b = 0; b < l.target.size(); ++b) {
          if (l.target[b] < 0) continue;
          s(a, b) -= l.weight[a] * l.weight[b] * inv[p + 1](l.target[a], l.target[b]);
        }
      }
    }
    s = 0.5 * (s + s.transpose()).eval();
    inv[p] = s.partialPivLu().inverse();
  }

  Eigen::MatrixXcd s0 = plane_block(planes[0], k2h2).cast<cdouble>() + K;
  {
    const Link& l = links[0];
    for (size_t a = 0; a < l.target.size(); ++a) {
      if (l.target[a] < 0) continue;
      for (size_t b = 0; b < l.target.size(); ++b) {
        if (l.target[b] < 0) continue;
        s0(a, b) -= l.weight[a] * l.weight[b] * inv[1](l.target[a], l.target[b]);
      }
    }
  }
  const double z0 = -lay.nl * h;
  const Eigen::VectorXcd f0 =
      (2.0 * I * std::sin(gamma_h * h) * std::exp(I * gamma_h * z0)) * psi.col(0).cast<cdouble>();

  std::vector<Eigen::VectorXcd> u(np);
  u[0] = s0.partialPivLu().solve(f0);
  for (int p = 0; p + 1 < np; ++p) {
    const Eigen::VectorXcd b = lift(links[p], u[p], static_cast<Eigen::Index>(planes[p + 1].iy.size()));
    u[p + 1] = -(inv[p + 1].cast<cdouble>() * b);
  }

  // Residual of the assembled system, plane by plane.
  double res2 = 0.0;
  for (int p = 0; p < np; ++p) {
    Eigen::VectorXcd r = plane_block(planes[p], k2h2).cast<cdouble>() * u[p];
    if (p == 0) r += K * u[0] - f0;
    if (p > 0) r += lift(links[p - 1], u[p - 1], static_cast<Eigen::Index>(planes[p].iy.size()));
    if (p + 1 < np) r += lower_of(links[p], u[p + 1]);
    res2 += r.squaredNorm();
  }

  // r1 from the projection on psi_1 at mid-guide.
  const int pm = lay.nl / 2;
  const double zm = planes[pm].jz * h;
  const cdouble inc = std::exp(I * gamma_h * zm);
  const Eigen::VectorXcd scat = u[pm] - inc * psi.col(0).cast<cdouble>();
  const cdouble proj = h * psi.col(0).cast<cdouble>().dot(scat);

  FDResult out;
  out.r1 = proj * inc;
  out.h = h;
  out.L = grid.L;
  out.n_dtn = n_dtn;
  out.snapped = lay.snapped;
  out.aperture_nodes = lay.aperture_nodes();
  out.gamma1_discrete = gamma_h;
  int count = 0;
  for (const auto& p : planes) count += static_cast<int>(p.iy.size());
  out.unknowns = count;
  out.residual = std::sqrt(res2) / f0.norm();
  return out;
}

Convergence richardson(const std::vector<double>& h, const std::vector<cdouble>& r1) {
  if (h.size() < 3 || h.size() != r1.size())
    throw DomainError("richardson needs >= 3 matching (h, r1) entries");
  const double q = h[h.size() - 2] / h.back();
  for (size_t i = 1; i < h.size(); ++i) {
    if (!(h[i] < h[i - 1]) || std::abs(h[i - 1] / h[i] - q) > 1e-9 * q)
      throw DomainError("richardson needs h in decreasing geometric progression");
  }
  Convergence c;
  c.h = h;
  c.r1 = r1;
  const size_t n = h.size();
  c.extrapolated = r1[n - 1] + (r1[n - 1] - r1[n - 2]) / (q * q - 1.0);
  std::vector<double> diffs;
  for (size_t i = 1; i < n; ++i) diffs.push_back(std::abs(r1[i] - r1[i - 1]));
  for (size_t i = 1; i < diffs.size(); ++i)
    if (!(diffs[i] < diffs[i - 1])) c.monotone = false;
  const double d1 = diffs[diffs.size() - 2], d2 = diffs.back();
  c.observed_order = d2 > 0.0 ? std::log(d1 / d2) / std::log(q) : std::numeric_limits<double>::infinity();
  if (!c.monotone) c.warning = "inconclusive convergence: successive differences do not shrink";
  return c;
}

Convergence fd_convergence(const Geometry& geometry, double k, Parity parity,
                           const std::vector<double>& h_list, double L, int n_dtn) {
  if (h_list.size() < 3) throw DomainError("fd_convergence needs >= 3 grid spacings");
  const double coarse = *std::max_element(h_list.begin(), h_list.end());
  std::vector<cdouble> r;
  for (double h : h_list) {
    FDGrid g;
    g.h = h;
    g.L = L;
    g.n_dtn = n_dtn;
    g.snap = coarse;
    r.push_back(fd_solve_half(geometry, k, parity, g).r1);
  }
  return richardson(h_list, r);
}

}  // namespace resonomatch::oracle_fd
