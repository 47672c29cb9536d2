#include <doctest.h>

#include <cmath>

#include "tiltlat/analytic.hpp"
#include "tiltlat/dnlse.hpp"

using namespace tiltlat;
using namespace tiltlat::analytic;

namespace {

// Ascending power series in long double, independent of the library code.
long double series_j(int n, long double z) {
  const int k0 = std::abs(n);
  long double term = 1.0L;
  for (int i = 1; i <= k0; ++i) term *= (z / 2.0L) / i;
  long double sum = term;
  for (int k = 1; k < 400; ++k) {
    term *= -(z / 2.0L) * (z / 2.0L) / (static_cast<long double>(k) * (k + k0));
    sum += term;
    if (std::fabs(term) < 1e-30L * std::fabs(sum) && k > z) break;
  }
  return (n < 0 && k0 % 2 == 1) ? -sum : sum;
}

// Bisection on the series for the first positive zero of J_1.
double j1_first_zero() {
  double lo = 3.0;
  double hi = 4.5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (series_j(1, lo) * series_j(1, mid) <= 0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("bessel trivial values") {
  CHECK(bessel_j(0, 0.0) == 1.0);
  CHECK(bessel_j(1, 0.0) == 0.0);
  CHECK(bessel_j(-3, 0.0) == 0.0);
  // J = 2, dFomega / dF = 1.21 gives an effective hopping of 1.
  CHECK(std::abs(2.0 * bessel_j(1, 1.21) - 1.0) < 0.005);
  CHECK(std::abs(bessel_j(1, j1_first_zero())) < 1e-12);
  CHECK(j1_first_zero() == doctest::Approx(3.8317).epsilon(1e-4));
}

TEST_CASE("bessel against std::cyl_bessel_j") {
  double worst = 0.0;
  for (double z : {0.01, 0.3, 0.99, 1.0, 1.21, 2.5, 3.8317, 7.0, 12.5, 25.0, 50.0, 99.0, 250.0, 1000.0}) {
    for (int n : {0, 1, 2, 3, 5, 10, 20, 40, 80, 150, 300}) {
      const double ref = std::cyl_bessel_j(static_cast<double>(n), z);
      worst = std::max(worst, std::abs(bessel_j(n, z) - ref));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("bessel against long double series") {
  double worst = 0.0;
  for (double z = 0.05; z <= 20.0; z += 0.35)
    for (int n = -30; n <= 30; ++n)
      worst = std::max(worst, std::abs(bessel_j(n, z) - static_cast<double>(series_j(n, z))));
  CHECK(worst < 1e-10);
}

TEST_CASE("bessel symmetry and domain") {
  for (int n = 0; n < 12; ++n) {
    const double sign = n % 2 ? -1.0 : 1.0;
    CHECK(bessel_j(-n, 3.3) == doctest::Approx(sign * bessel_j(n, 3.3)).epsilon(1e-14));
    CHECK(bessel_j(n, -3.3) == doctest::Approx(sign * bessel_j(n, 3.3)).epsilon(1e-14));
  }
  CHECK_THROWS_AS((void)bessel_j(10001, 1.0), OutOfRange);
  CHECK_THROWS_AS((void)bessel_j(0, 1.0e4 + 1), OutOfRange);
  CHECK_NOTHROW((void)bessel_j(10000, 1.0e4));
  // Transition region n = z: J_n(n) ~ Gamma(1/3) / (2^{2/3} 3^{1/6} pi n^{1/3}).
  const double transition = std::tgamma(1.0 / 3.0) / (std::cbrt(4.0) * std::pow(3.0, 1.0 / 6.0) * kPi * std::cbrt(1.0e4));
  CHECK(bessel_j(10000, 1.0e4) == doctest::Approx(transition).epsilon(1e-3));
  CHECK(std::abs(bessel_j(9999, 1.0e4) -
                 (2.0 * 9998 / 1.0e4 * bessel_j(9998, 1.0e4) - bessel_j(9997, 1.0e4))) < 1e-10);
}

TEST_CASE("bessel identities") {
  double rec = 0.0;
  for (double z = 0.5; z <= 20.0; z += 0.5)
    for (int n = 1; n <= 30; ++n)
      rec = std::max(rec, std::abs(bessel_j(n - 1, z) + bessel_j(n + 1, z) - 2.0 * n / z * bessel_j(n, z)));
  CHECK(rec < 1e-9);
  for (double z : {0.5, 5.0, 25.0, 120.0}) {
    double s = 0.0;
    const int reach = static_cast<int>(z) + 60;
    for (int n = -reach; n <= reach; ++n) s += bessel_j(n, z) * bessel_j(n, z);
    CHECK(std::abs(s - 1.0) < 1e-10);
  }
  const auto seq = bessel_j_sequence(40, 7.5);
  for (int n = 0; n <= 40; ++n) CHECK(seq[n] == doctest::Approx(bessel_j(n, 7.5)).epsilon(1e-13));
}

TEST_CASE("wannier-stark states") {
  const SiteRange w{-400, 400};
  SUBCASE("strong field limit") {
    const auto a = wannier_stark_state(3, LatticeParams{1.0, 1e3}, w);
    CHECK(a[w.index(3)] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(a[w.index(4)]) < 1e-3);
  }
  SUBCASE("eigenvector of the tilted chain") {
    const LatticeParams p{1.0, 0.04};
    const int m = 0;
    const auto a = wannier_stark_state(m, p, w);
    double res = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double left = i > 0 ? a[i - 1] : 0.0;
      const double right = i + 1 < a.size() ? a[i + 1] : 0.0;
      const double h = -0.5 * p.J * (left + right) + p.dF * w.site(i) * a[i];
      res = std::max(res, std::abs(h - p.dF * m * a[i]));
    }
    CHECK(res < 1e-8);
  }
  SUBCASE("normalization") {
    const auto a = wannier_stark_state(0, LatticeParams{1.0, 0.04}, SiteRange{-200, 200});
    double s = 0.0;
    for (double v : a) s += v * v;
    CHECK(std::abs(s - 1.0) < 1e-10);
  }
  SUBCASE("completeness") {
    const LatticeParams p{1.0, 0.25};
    const SiteRange big{-120, 120};
    std::vector<std::vector<double>> states;
    for (int m = -100; m <= 100; ++m) states.push_back(wannier_stark_state(m, p, big));
    double worst = 0.0;
    for (int l = -10; l <= 10; ++l)
      for (int lp = -10; lp <= 10; ++lp) {
        double s = 0.0;
        for (const auto& a : states) s += a[big.index(l)] * a[big.index(lp)];
        worst = std::max(worst, std::abs(s - (l == lp ? 1.0 : 0.0)));
      }
    CHECK(worst < 1e-8);
  }
  CHECK_THROWS_AS((void)wannier_stark_state(0, LatticeParams{1.0, 0.0}, w), ZeroTilt);
  CHECK_THROWS_AS((void)wannier_stark_state(0, LatticeParams{1.0, 0.009}, w), WindowTooNarrow);
}

TEST_CASE("dipole elements against Bessel sums") {
  const LatticeParams p{2.0, 1.0};  // z = 2
  CHECK(ws_dipole_element(3, 3, p) == 3.0);
  CHECK(ws_dipole_element(3, 4, p) == 1.0);
  CHECK(ws_dipole_element(3, 7, p) == 0.0);
  const double z = p.J / p.dF;
  for (int m = -3; m <= 3; ++m)
    for (int mp = -3; mp <= 6; ++mp) {
      double s = 0.0;
      for (int l = -80; l <= 80; ++l) s += l * double(series_j(l - m, z)) * double(series_j(l - mp, z));
      CHECK(std::abs(s - ws_dipole_element(m, mp, p)) < 1e-8);
    }
  CHECK_THROWS_AS((void)ws_dipole_element(0, 0, LatticeParams{}), ZeroTilt);
}

TEST_CASE("Bloch oscillation closed forms") {
  const LatticeParams p{1.0, 0.04};
  const double TB = p.bloch_period();
  CHECK(bo_center(0.0, p) == 0.0);
  CHECK(bo_center(kPi / p.dF, p) == doctest::Approx(50.0));
  CHECK(std::abs(bo_center(TB, p)) < 1e-12);
  CHECK(breathing_width(0.0, 10.0, p) == 10.0);
  CHECK(breathing_width(TB / 2, 10.0, p) == doctest::Approx(std::sqrt(1350.0)));
  CHECK(breathing_width(TB / 2, 10.0, p) == doctest::Approx(36.74).epsilon(1e-3));
  // dF -> 0 at fixed t gives the fast ballistic law.
  const LatticeParams weak{1.0, 1e-7};
  CHECK(breathing_width(30.0, 10.0, weak) ==
        doctest::Approx(ballistic_width(30.0, 10.0, 1.0, BallisticRegime::FastIncoherent)).epsilon(1e-10));
  CHECK_THROWS_AS((void)bo_center(1.0, LatticeParams{}), ZeroTilt);
  CHECK_THROWS_AS((void)breathing_width(1.0, 10.0, LatticeParams{}), ZeroTilt);
}

TEST_CASE("ballistic widths") {
  for (auto r : {BallisticRegime::SlowCoherent, BallisticRegime::FastIncoherent})
    CHECK(ballistic_width(0.0, 10.0, 1.0, r) == 10.0);
  CHECK(ballistic_width(200 * kPi, 10.0, 1.0, BallisticRegime::SlowCoherent) ==
        doctest::Approx(std::sqrt(100.0 + kPi * kPi * 100.0)));
  CHECK(ballistic_width(200 * kPi, 10.0, 1.0, BallisticRegime::SlowCoherent) == doctest::Approx(32.98).epsilon(1e-3));
  CHECK(ballistic_rate(10.0, 1.0, BallisticRegime::SlowCoherent) == 0.05);
  CHECK(ballistic_rate(3.0, 1.0, BallisticRegime::FastIncoherent) ==
        ballistic_rate(30.0, 1.0, BallisticRegime::FastIncoherent));
  // Slope of the closed form tends to the rate.
  const double t = 1e6;
  for (auto r : {BallisticRegime::SlowCoherent, BallisticRegime::FastIncoherent})
    CHECK((ballistic_width(t + 1, 10.0, 1.0, r) - ballistic_width(t, 10.0, 1.0, r)) ==
          doctest::Approx(ballistic_rate(10.0, 1.0, r)).epsilon(1e-6));
}

TEST_CASE("chi reductions") {
  const LatticeParams driven{2.0, 0.5, 0.605, 0.48};
  CHECK(std::abs(chi(0.0, driven).value) == 0.0);
  // Undriven: the n = 0 term alone reproduces the breathing law.
  const LatticeParams p{1.0, 0.04};
  double worst = 0.0;
  double worst_x = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double t = 100.0 * p.tunneling_period() * i / 200;
    worst = std::max(worst, std::abs(driven_width(t, 10.0, p) - breathing_width(t, 10.0, p)));
    // Center up to the sign of the single term.
    worst_x = std::max(worst_x, std::abs(std::abs(driven_center(t, p)) - bo_center(t, p)));
  }
  CHECK(worst < 1e-8);
  CHECK(worst_x < 1e-8);
  // Untilted and undriven: fast ballistic law.
  const LatticeParams flat{1.0, 0.0};
  for (double t : {0.0, 10.0, 300.0})
    CHECK(std::abs(driven_width(t, 10.0, flat) -
                   ballistic_width(t, 10.0, 1.0, BallisticRegime::FastIncoherent)) < 1e-8);
}

TEST_CASE("chi truncation") {
  const LatticeParams p{2.0, 0.5, 0.605, 0.48};
  const double a = p.drive_index();
  CHECK(chi_default_terms(a) >= std::max(5, int(std::ceil(a)) + 10));
  CHECK(std::abs(bessel_j(chi_default_terms(a) + 1, a)) <= kChiTruncationTolerance);
  for (double t : {1.0, 77.0, 628.0}) {
    const auto base = chi(t, p).value;
    CHECK(std::abs(chi(t, p, {chi_default_terms(a) + 25, {}}).value - base) < 1e-10);
  }
  CHECK_THROWS_AS((void)chi(10.0, p, {1, {}}), BadTruncation);
  // Large modulation index.
  const LatticeParams strong{1.0, 0.5, 20.0, 0.5};
  CHECK(std::abs(bessel_j(chi_default_terms(strong.drive_index()) + 1, strong.drive_index())) <= 1e-12);
}

TEST_CASE("chi at exact resonance") {
  // omega = omega_B: the n = 1 term grows linearly, |chi| ~ J |J_1(a)| t / 2.
  const LatticeParams p{2.0, 0.5, 0.605, 0.5};
  const double a = p.drive_index();
  const double t = 2.0e4;
  const double expected = p.J * std::abs(bessel_j(1, a)) * t / 2.0;
  CHECK(std::isfinite(chi(t, p).modulus()));
  CHECK(chi(t, p).modulus() == doctest::Approx(expected).epsilon(1e-3));
  // Peak slope of the width.
  const double slope = (driven_width(t + 100, 10.0, p) - driven_width(t, 10.0, p)) / 100.0;
  CHECK(slope == doctest::Approx(resonance_peak_slope(1, p)).epsilon(1e-2));
}

TEST_CASE("chi is continuous across the resonance band") {
  const double wB = 0.5;
  for (double eps : {1e-9, 1e-6, 1e-3}) {
    for (double t : {10.0, 100.0}) {
      auto at = [&](double omega) {
        return chi(t, LatticeParams{2.0, wB, 0.605, omega}, {std::nullopt, eps}).value;
      };
      const double d = eps * 1e-6;
      const complex in = at(wB - (eps - d));
      const complex out = at(wB - (eps + d));
      const complex out2 = at(wB - (eps + 3 * d));
      // The step across the band edge matches the smooth variation on one side.
      CHECK(std::abs(std::abs(in - out) - std::abs(out - out2)) < 1e-8);
    }
  }
  // Exactly at resonance versus a hair off it.
  const LatticeParams on{2.0, 0.5, 0.605, 0.5};
  const LatticeParams off{2.0, 0.5, 0.605, 0.5 * (1 + 1e-14)};
  CHECK(std::abs(chi(100.0, on).value - chi(100.0, off).value) < 1e-8);
}

TEST_CASE("driven closed forms") {
  const LatticeParams p{2.0, 0.5, 0.605, 0.48};
  CHECK(driven_center(0.0, p) == 0.0);
  CHECK(driven_width(0.0, 10.0, p) == 10.0);
  // Super-oscillation amplitude: max |x| over one slow period about 2 J_eff / dF_eff.
  const double T = kTwoPi / 0.02;
  double xmax = 0.0;
  for (int i = 0; i <= 4000; ++i) xmax = std::max(xmax, std::abs(driven_center(T * i / 4000, p)));
  CHECK(xmax == doctest::Approx(100.0).epsilon(0.05));
  // Off-resonant envelope of the n = 1 term.
  double chimax = 0.0;
  for (int i = 0; i <= 4000; ++i) chimax = std::max(chimax, chi(T * i / 4000, p).modulus());
  CHECK(chimax == doctest::Approx(resonance_envelope(1, p)).epsilon(0.05));
}

TEST_CASE("effective model") {
  const auto m = effective_model(LatticeParams{2.0, 0.5, 0.605, 0.48});
  CHECK(m.J_eff == doctest::Approx(1.0).epsilon(5e-3));
  CHECK(m.dF_eff == doctest::Approx(0.02));
  REQUIRE(m.L_eff);
  CHECK(*m.L_eff == doctest::Approx(50.0).epsilon(5e-3));
  const double z1 = j1_first_zero();
  CHECK(std::abs(effective_model(LatticeParams{1.0, 1.0, z1, 1.0}).J_eff) < 1e-12);
  const LatticeParams small{1.0, 1.0, 0.1, 0.99};
  CHECK(effective_model(small, EffectiveVariant::RWA).J_eff == doctest::Approx(0.05));
  CHECK(effective_model(small).J_eff == doctest::Approx(0.04994).epsilon(1e-4));
  CHECK_FALSE(effective_model(LatticeParams{1.0, 0.5, 0.3, 0.5}).L_eff.has_value());
  CHECK_THROWS_AS((void)effective_model(LatticeParams{1.0, 0.0, 0.3, 0.5}), ZeroTilt);
}
