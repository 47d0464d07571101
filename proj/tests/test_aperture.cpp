#include <doctest.h>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "resonomatch/aperture.hpp"
#include "resonomatch/errors.hpp"

using namespace resonomatch;
using namespace resonomatch::aperture;
using std::numbers::pi;

namespace {
Truncation trunc(int n, int p, bool tail = true) {
  Truncation t;
  t.n_guide = n;
  t.n_res = n;
  t.p_aperture = p;
  t.tail_correction = tail;
  return t;
}

// (b_p, g) on D through the angle substitution, using only basis values.
double basis_integral(const ApertureBasis& basis, int p, const std::function<double(double)>& g) {
  const double mid = basis.mid(), hw = basis.half_width();
  return oracle::integrate(
      [&](double th) {
        const double y = mid + hw * std::cos(th);
        return basis.value(p, y) * g(y) * hw * std::sin(th);
      },
      0.0, pi, 64);
}
}  // namespace

TEST_SUITE("aperture") {

TEST_CASE("raw Gram matrix matches quadrature") {
  const auto basis = make_aperture_basis(-0.65, -0.45, 10);
  for (int p = 1; p <= 10; ++p)
    for (int q = 1; q <= 10; ++q) {
      const double quad = oracle::integrate_edge_weighted(
          [&](double y) { return basis.raw_value(p, y); }, q, basis.lo, basis.hi);
      CHECK(std::abs(basis.gram(p - 1, q - 1) - quad) <= 1e-13);
    }
}

TEST_CASE("basis is orthonormal on the aperture") {
  const auto basis = make_aperture_basis(-0.65, -0.45, 12);
  for (int p = 1; p <= 12; ++p)
    for (int q = 1; q <= 12; ++q) {
      const double v = basis_integral(basis, p, [&](double y) { return basis.value(q, y); });
      CHECK(std::abs(v - (p == q ? 1.0 : 0.0)) <= 1e-12);
    }
  CHECK(basis.value(1, -0.7) == 0.0);
  CHECK(basis.value(1, -0.4) == 0.0);
  CHECK_THROWS_AS(make_aperture_basis(-0.45, -0.65, 4), DomainError);
}

TEST_CASE("couplings match quadrature on random cases") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pick_p(1, 16), pick_n(1, 300);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    Geometry g;
    const double w = 0.02 + 0.5 * u(rng);
    const double mid = g.guide_lo + 0.5 * w + 0.01 + u(rng) * (g.guide_width() - w - 0.02);
    g.hole_lo = mid - 0.5 * w;
    g.hole_hi = mid + 0.5 * w;
    const auto basis = make_aperture_basis(g.hole_lo, g.hole_hi, 16);
    const modal::ModeFamily fam =
        c % 3 == 0 ? modal::guide_modes(g, 300)
                   : modal::resonator_half_modes(g, c % 3 == 1 ? Parity::dirichlet : Parity::neumann, 300);
    const auto cm = coupling_matrix(basis, fam);
    const int p = pick_p(rng), n = pick_n(rng);
    const double quad = basis_integral(basis, p, [&](double y) {
      return oracle::sine_mode(fam.lo, fam.length(), fam.wavenumber(n), y);
    });
    worst = std::max(worst, std::abs(cm(p - 1, n - 1) - quad));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("trigamma") {
  CHECK(trigamma(1.0) == doctest::Approx(pi * pi / 6).epsilon(1e-14));
  CHECK(trigamma(0.5) == doctest::Approx(pi * pi / 2).epsilon(1e-14));
  for (double x : {0.3, 2.7, 13.0, 201.0, 400.5})
    CHECK(trigamma(x) == doctest::Approx(oracle::trigamma_series(x)).epsilon(1e-12));
}

TEST_CASE("tail sum approximates the omitted modes") {
  // With the tail, N = 200 and N = 800 assemble nearly the same A; without it
  // they differ by the whole 1/N remainder.
  const Geometry g;
  const double k = 5.0;
  auto A = [&](int n, bool tail) { return assemble(g, k, Parity::dirichlet, trunc(n, 12, tail)).A; };
  const double raw = (A(800, false) - A(200, false)).norm();
  const double corrected = (A(800, true) - A(200, true)).norm();
  CHECK(corrected < 0.1 * raw);
  const auto table = make_coupling_table(g, Parity::neumann, trunc(200, 8));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(table->tail);
  CHECK(es.eigenvalues().minCoeff() >= -1e-12 * es.eigenvalues().maxCoeff());
  CHECK((table->tail - table->tail.transpose()).norm() <= 1e-14 * table->tail.norm());
}

TEST_CASE("P = 1 hand composition") {
  const Geometry g;
  const double k = 5.0;
  const auto sys = assemble(g, k, Parity::dirichlet, trunc(2, 1, false));
  const auto guide = modal::guide_modes(g, 2);
  const auto res = modal::resonator_half_modes(g, Parity::dirichlet, 2);
  const auto basis = make_aperture_basis(g.hole_lo, g.hole_hi, 1);
  auto ov = [&](const modal::ModeFamily& f, int n) {
    return basis_integral(basis, 1, [&](double y) { return f.value(n, y); });
  };
  const double g1 = std::sqrt(k * k - guide.eigenvalues[0]);
  const double g2 = std::sqrt(guide.eigenvalues[1] - k * k);
  const double b2 = std::sqrt(res.eigenvalues[1] - k * k);
  const double tau2 = b2 / std::tanh(b2 * g.a);
  const double expected = g1 * std::pow(ov(guide, 1), 2) + g2 * std::pow(ov(guide, 2), 2) +
                          tau2 * std::pow(ov(res, 2), 2);
  CHECK(sys.A(0, 0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(sys.g_psi[0] == doctest::Approx(ov(guide, 1)).epsilon(1e-12));
  CHECK(sys.g_chi[0] == doctest::Approx(ov(res, 1)).epsilon(1e-12));
  CHECK(sys.gamma1 == doctest::Approx(g1).epsilon(1e-14));
  const double b1 = std::sqrt(k * k - res.eigenvalues[0]);
  CHECK(sys.tau1 == doctest::Approx(b1 / std::tan(b1 * g.a)).epsilon(1e-13));

  const auto q = quad_forms(sys);
  CHECK(q.alpha == doctest::Approx(sys.g_psi[0] * sys.g_psi[0] / sys.A(0, 0)).epsilon(1e-14));
  CHECK(v_norm(sys, Eigen::VectorXcd::Ones(1)) == doctest::Approx(1.0 + sys.A(0, 0)).epsilon(1e-14));
  CHECK(v_norm(sys, Eigen::VectorXcd::Zero(1)) == 0.0);
}

TEST_CASE("A is symmetric and positive definite") {
  const Geometry g;
  for (double k : {4.2, 5.0, 5.7, 6.5, 7.1, 7.7})
    for (Parity p : {Parity::dirichlet, Parity::neumann}) {
      const auto sys = assemble(g, k, p, Truncation{});
      CHECK((sys.A - sys.A.transpose()).norm() == 0.0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sys.A);
      CHECK(es.eigenvalues().minCoeff() > 0.0);
      CHECK(sys.A.allFinite());
    }
}

TEST_CASE("assembly at a resonator pole names the mode") {
  const Geometry g;
  // Dirichlet mode 2: mu = 4 pi^2, beta a = pi.
  const double k = std::sqrt(4 * pi * pi + pi * pi);
  REQUIRE(single_mode_band(g).contains(k));
  try {
    assemble(g, k, Parity::dirichlet, Truncation{});
    FAIL("expected SingularFrequencyError");
  } catch (const SingularFrequencyError& e) {
    CHECK(e.mode() == 2);
  }
  // mode 1 pole is carried outside A
  const auto sys = assemble(g, closed_resonator_frequency(g), Parity::dirichlet, Truncation{});
  CHECK(sys.tau1_singular);
}

TEST_CASE("quadratic forms") {
  const Geometry g;
  const auto sys = assemble(g, 5.0, Parity::dirichlet, Truncation{});
  const auto q = quad_forms(sys);
  CHECK(q.alpha > 0.0);
  CHECK(q.delta > 0.0);
  CHECK(q.sigma * q.sigma < q.alpha * q.delta);
  // independent solve
  const Eigen::VectorXd x = sys.A.llt().solve(sys.g_psi);
  CHECK(q.alpha == doctest::Approx(sys.g_psi.dot(x)).epsilon(1e-12));
  CHECK(q.sigma == doctest::Approx(sys.g_chi.dot(x)).epsilon(1e-12));

  auto same = sys;
  same.g_chi = same.g_psi;
  const auto qs = quad_forms(same);
  CHECK(qs.sigma * qs.sigma == doctest::Approx(qs.alpha * qs.delta).epsilon(1e-13));

  auto broken = sys;
  broken.A(0, 0) = -1.0;
  CHECK_THROWS_AS(quad_forms(broken), NotSpdError);
}

TEST_CASE("monotone in N without the tail") {
  const Geometry g;
  const double k = 5.0;
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(8);
  for (int n : {2, 10, 50, 100, 200, 400}) {
    const Eigen::VectorXd d = assemble(g, k, Parity::dirichlet, trunc(n, 8, false)).A.diagonal();
    for (int p = 0; p < 8; ++p) CHECK(d[p] >= prev[p]);
    prev = d;
  }
}

TEST_CASE("quadratic forms converge in N") {
  const Geometry g;
  for (Parity p : {Parity::dirichlet, Parity::neumann}) {
    const auto q1 = quad_forms(assemble(g, 5.0, p, trunc(200, 12)));
    const auto q2 = quad_forms(assemble(g, 5.0, p, trunc(400, 12)));
    CHECK(std::abs(q2.alpha - q1.alpha) / std::abs(q1.alpha) <= 1e-3);
    CHECK(std::abs(q2.delta - q1.delta) / std::abs(q1.delta) <= 1e-3);
    CHECK(std::abs(q2.sigma - q1.sigma) / std::abs(q1.sigma) <= 1e-3);
  }
}

TEST_CASE("alpha and delta shrink with the hole") {
  const Geometry g;
  for (double k : {5.0, pi * std::sqrt(2.0)}) {
    double pa = 1e300, pd = 1e300;
    for (double w : {0.3, 0.2, 0.1, 0.05}) {
      const Geometry gw = g.with_hole_width(w);
      const int n = recommended_modes(gw, 12);
      const auto q = quad_forms(assemble(gw, k, Parity::dirichlet, trunc(n, 12)));
      CHECK(q.alpha < pa);
      CHECK(q.delta < pd);
      pa = q.alpha;
      pd = q.delta;
    }
  }
}

TEST_CASE("parities share the guide contributions") {
  const Geometry g;
  const auto t = trunc(200, 12, false);
  const double k = 5.3;
  const auto d = assemble(g, k, Parity::dirichlet, t);
  const auto n = assemble(g, k, Parity::neumann, t);
  CHECK((d.g_psi - n.g_psi).norm() == 0.0);
  CHECK((d.gamma - n.gamma).norm() == 0.0);
  auto resonator_part = [](const GalerkinSystem& s) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(s.size(), s.size());
    const auto& h = s.table->resonator_coupling;
    for (int j = 2; j <= static_cast<int>(s.resonator_axial.size()); ++j) {
      const double tau = s.resonator_axial[j - 1].tau;
      if (tau >= 0.0) m += tau * h.col(j - 1) * h.col(j - 1).transpose();
    }
    return m;
  };
  const Eigen::MatrixXd rest_d = d.A - resonator_part(d), rest_n = n.A - resonator_part(n);
  CHECK((rest_d - rest_n).norm() <= 1e-12 * rest_d.norm());
}

TEST_CASE("channel set") {
  const Geometry g;
  // Neumann mode 2 propagates with beta a in (pi/2, pi) at k = 5.4, so tau_2 < 0.
  const auto sys = assemble(g, 5.4, Parity::neumann, Truncation{});
  REQUIRE(sys.extra_modes.size() == 1);
  CHECK(sys.extra_modes[0] == 2);
  const auto ch = channel_set(sys);
  CHECK(ch.coefficients[0] == std::complex<double>(-sys.gamma1, -sys.gamma1));
  CHECK(ch.coefficients[1].real() == sys.tau1);
  CHECK(ch.couplings.cols() == 2 + static_cast<int>(sys.extra_modes.size()));
  for (size_t j = 0; j < sys.extra_modes.size(); ++j)
    CHECK(sys.resonator_axial[sys.extra_modes[j] - 1].tau < 0.0);
  CHECK((ch.gram - ch.gram.transpose()).norm() == 0.0);
}

}  // TEST_SUITE
