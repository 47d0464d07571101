#include <doctest.h>

#include <numbers>

#include "resonomatch/errors.hpp"
#include "resonomatch/resonance.hpp"

using namespace resonomatch;
using namespace resonomatch::resonance;
using std::numbers::pi;

namespace {
const Band default_band{4.0, 7.8};

const scattering::Model& default_model() {
  static const auto m = scattering::make_model(Geometry{});
  return m;
}

const ResonanceReport& default_report() {
  static const auto r = find_resonance(default_model(), default_band);
  return r;
}
}  // namespace

TEST_SUITE("resonance") {

TEST_CASE("sweep rows") {
  const auto rows = sweep(default_model(), default_band, 400, 0);
  REQUIRE(rows.size() == 400);
  CHECK(rows.front().k == 4.0);
  CHECK(rows.back().k == 7.8);
  double lo = 1e300, hi = 0.0;
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    CHECK(r.energy_residual <= 1e-10);
    CHECK(r.unitarity_D <= 1e-10);
    CHECK(r.unitarity_N <= 1e-10);
    CHECK(r.r1 == 0.5 * (r.r1_D + r.r1_N));
    CHECK(r.t1 == 0.5 * (r.r1_N - r.r1_D));
    if (i) {
      CHECK(r.k > rows[i - 1].k);
      const double dphase = r.phase_D - rows[i - 1].phase_D;
      if (!(r.flags & flag::phase_gap)) CHECK(std::abs(dphase) < pi);
    }
    lo = std::min(lo, r.abs_r1);
    hi = std::max(hi, r.abs_r1);
  }
  CHECK(lo < hi);

  const auto two = sweep(default_model(), default_band, 2, 1);
  REQUIRE(two.size() == 2);
  CHECK(two[0].k == 4.0);
  CHECK(two[1].k == 7.8);
  CHECK_THROWS_AS(sweep(default_model(), default_band, 1, 1), DomainError);
  CHECK_THROWS_AS(sweep(default_model(), Band{3.0, 5.0}, 10, 1), BandError);
}

TEST_CASE("sweep is independent of the worker count") {
  const auto a = sweep(default_model(), default_band, 64, 1);
  const auto b = sweep(default_model(), default_band, 64, 5);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].r1_D == b[i].r1_D);
    CHECK(a[i].r1_N == b[i].r1_N);
    CHECK(a[i].phase_D == b[i].phase_D);
    CHECK(a[i].flags == b[i].flags);
  }
}

TEST_CASE("poles are stepped around and flagged") {
  const Geometry g;
  const double kc = closed_resonator_frequency(g);
  const auto rows = sweep(default_model(), Band{kc - 0.25, kc + 0.25}, 3, 1);
  CHECK((rows[1].flags & flag::shifted) != 0);
  CHECK(std::abs(rows[1].k - kc) >= 1e-8 * (1 - 1e-6));
  CHECK(rows[1].energy_residual <= 1e-10);
  const auto poles = closed_resonator_poles(g, Truncation{}, default_band);
  CHECK(std::find_if(poles.begin(), poles.end(), [&](double p) { return std::abs(p - kc) < 1e-12; }) !=
        poles.end());
  double k = kc + 5e-9;
  CHECK(avoid_poles(k, poles));
  CHECK(std::abs(k - kc) >= 1e-8 * (1 - 1e-6));
  k = 5.0;
  CHECK_FALSE(avoid_poles(k, poles));
  CHECK(k == 5.0);
}

TEST_CASE("resonance function changes sign where r1D = +1") {
  const auto& rep = default_report();
  const double e = 1e-4;
  const double fl = resonance_function(default_model(), rep.k_star - e, Parity::dirichlet);
  const double fr = resonance_function(default_model(), rep.k_star + e, Parity::dirichlet);
  CHECK(fl * fr < 0.0);
  CHECK(std::abs(rep.r1_D_at_kstar - 1.0) <= 1e-6);
  // finite at the tau_1 pole
  CHECK(std::isfinite(resonance_function(default_model(), closed_resonator_frequency(Geometry{}),
                                         Parity::dirichlet)));
}

TEST_CASE("find_resonance on the default geometry") {
  const auto& rep = default_report();
  CHECK(rep.k_closed == doctest::Approx(pi * std::sqrt(2.0)).epsilon(1e-14));
  CHECK(std::abs(rep.k_star - pi * std::sqrt(2.0)) <= 0.3);
  CHECK(rep.min_abs_r1 <= 0.3);
  CHECK(rep.min_abs_r1 >= 0.0);
  CHECK(rep.min_abs_r1 <= rep.abs_r1_at_kstar);
  CHECK(std::abs(rep.t1_at_kstar) >= 0.95);
  CHECK(std::norm(rep.t1_at_kstar) + rep.abs_r1_at_kstar * rep.abs_r1_at_kstar ==
        doctest::Approx(1.0).epsilon(1e-10));
  const Band sb = single_mode_band(Geometry{});
  CHECK(sb.contains(rep.k_star));
  CHECK(rep.hole_width == doctest::Approx(0.2).epsilon(1e-14));
  // k_star and argmin |r1| sit inside one resonance window
  CHECK(std::abs(rep.k_star - rep.k_min_abs_r1) <= rep.resonance_width);
  CHECK(rep.width_lo < rep.k_star);
  CHECK(rep.k_star < rep.width_hi);
  // determinant root, phase root and |r1| minimum agree
  CHECK(std::abs(rep.determinant_root - rep.k_star) <= 0.05);
  CHECK(std::abs(rep.k_min_abs_r1 - rep.k_star) <= 0.05);
  CHECK(std::abs(rep.k_min_abs_r1 - rep.determinant_root) <= 0.05);
}

TEST_CASE("find_resonance refines to 1e-10") {
  const auto& rep = default_report();
  const auto& m = default_model();
  const double fl = resonance_function(m, rep.k_star - 2e-10, Parity::dirichlet);
  const double fr = resonance_function(m, rep.k_star + 2e-10, Parity::dirichlet);
  CHECK(fl * fr <= 0.0);
}

TEST_CASE("smaller hole moves k_star toward k_closed") {
  const Geometry g;
  auto shift = [&](double w) {
    const Geometry gw = g.with_hole_width(w);
    Truncation t;
    t.n_guide = t.n_res = recommended_modes(gw, t.p_aperture);
    const auto r = find_resonance(gw, default_band, t);
    return std::abs(r.k_star - pi * std::sqrt(2.0));
  };
  CHECK(shift(0.1) < shift(0.2));
}

TEST_CASE("determinant") {
  const auto sys = aperture::assemble(default_model().dirichlet, 5.0);
  auto zero = sys;
  zero.g_psi.setZero();
  zero.g_chi.setZero();
  CHECK(std::abs(determinant(zero) - 1.0) <= 1e-15);
  // two-channel closed form
  const auto q = aperture::quad_forms(sys);
  const cdouble s_psi(-sys.gamma1, -sys.gamma1);
  const cdouble closed = (1.0 + s_psi * q.alpha) * (1.0 + sys.tau1 * q.delta) - s_psi * sys.tau1 * q.sigma * q.sigma;
  REQUIRE(sys.extra_modes.empty());
  CHECK(std::abs(determinant(sys) - closed) <= 1e-12 * std::abs(closed));
  CHECK(std::isinf(determinant(Geometry{}, closed_resonator_frequency(Geometry{}), Truncation{}).real()));

  const auto& rep = default_report();
  const double at = std::abs(determinant(default_model(), rep.determinant_root));
  CHECK(at <= std::abs(determinant(default_model(), rep.determinant_root - 1e-3)));
  CHECK(at <= std::abs(determinant(default_model(), rep.determinant_root + 1e-3)));
}

TEST_CASE("Cauchy-Schwarz at every sweep point") {
  for (double k = 4.0; k <= 7.8; k += 3.8 / 399) {
    double kk = k;
    avoid_poles(kk, closed_resonator_poles(Geometry{}, Truncation{}, Band{3.9, 7.9}));
    for (Parity p : {Parity::dirichlet, Parity::neumann}) {
      const auto q = aperture::quad_forms(aperture::assemble(default_model().table(p), kk));
      CHECK(q.sigma * q.sigma <= q.alpha * q.delta);
      // the sigma^2 term is bounded by the product term
      const double t1 = aperture::assemble(default_model().table(p), kk).tau1;
      if (std::isfinite(t1)) CHECK(std::abs(t1) * q.sigma * q.sigma <= std::abs(t1) * q.alpha * q.delta);
    }
  }
}

TEST_CASE("no resonance in an excluded band") {
  // (5, 6) holds no Dirichlet phase root: check independently on a fine grid.
  const Band band{5.0, 6.0};
  double closest = 1e300;
  for (int i = 0; i <= 4000; ++i) {
    const double k = band.lo + band.width() * i / 4000.0;
    closest = std::min(closest, std::abs(scattering::solve_half(default_model(), k, Parity::dirichlet).r1 - 1.0));
  }
  REQUIRE(closest > 0.1);
  try {
    find_resonance(default_model(), band);
    FAIL("expected NoResonanceError");
  } catch (const NoResonanceError& e) {
    CHECK(std::string(e.what()).find("arg r1^D range") != std::string::npos);
  }
}

TEST_CASE("phase jump across the resonance") {
  const auto& rep = default_report();
  const Band sb = single_mode_band(Geometry{});
  const Band window{std::max(rep.k_star - 0.5, sb.lo + 1e-6), std::min(rep.k_star + 0.5, sb.hi - 1e-6)};
  const auto rows = sweep(default_model(), window, 400, 0);
  const double jump = rows.back().phase_D - rows.front().phase_D;
  CHECK(jump > 1.5 * pi);
  CHECK(jump < 2.5 * pi);
}

TEST_CASE("root finders") {
  const double r = brent_root([](double x) { return std::cos(x) - x; }, 0.0, 1.0);
  CHECK(std::abs(r - 0.73908513321516067) <= 1e-10);
  CHECK_THROWS_AS(brent_root([](double x) { return x * x + 1; }, -1.0, 1.0), DomainError);
  const double m = golden_minimum([](double x) { return (x - 0.3) * (x - 0.3); }, 0.0, 1.0);
  CHECK(std::abs(m - 0.3) <= 1e-6);
}

TEST_CASE("asymptotic study") {
  const std::vector<double> widths{0.3, 0.2, 0.1, 0.05};
  const auto rows = asymptotic_study(Geometry{}, widths, default_band, Truncation{});
  REQUIRE(rows.size() == 4);
  for (size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].alpha < rows[i - 1].alpha);
    CHECK(rows[i].delta < rows[i - 1].delta);
    CHECK(std::abs(rows[i].shift) < std::abs(rows[i - 1].shift));
    CHECK(rows[i].report.abs_r1_at_kstar < rows[i - 1].report.abs_r1_at_kstar);
    CHECK(rows[i].report.resonance_width < rows[i - 1].report.resonance_width);
  }
  for (const auto& r : rows) {
    CHECK(r.n_modes >= recommended_modes(Geometry{}.with_hole_width(r.hole_width), 12));
    CHECK(r.shift == doctest::Approx(r.report.k_closed - r.report.k_star).epsilon(1e-14));
  }
  const auto one = asymptotic_study(Geometry{}, {0.2}, default_band, Truncation{});
  CHECK(one.size() == 1);
}

}  // TEST_SUITE
