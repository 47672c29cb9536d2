#include <doctest.h>

#include <cmath>

#include "tiltlat/analytic.hpp"
#include "tiltlat/ensemble.hpp"

using namespace tiltlat;

namespace {

ObservableSeries synthetic(const std::vector<double>& times, double (*f)(double)) {
  std::vector<double> m2(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) m2[i] = f(times[i]);
  return reduce_moments(times, {std::vector<double>(times.size(), 0.0)}, {m2});
}

std::vector<double> linear_times(double t_max, int n) {
  std::vector<double> t(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) t[static_cast<std::size_t>(i)] = t_max * i / n;
  return t;
}

}  // namespace

TEST_CASE("moments") {
  const SiteRange w{-2, 2};
  auto m = moments(std::vector<double>{0, 0, 1, 0, 0}, w);
  CHECK(m.x == 0.0);
  CHECK(m.sigma == 0.0);
  m = moments(std::vector<double>{0, 0.5, 0, 0.5, 0}, w);
  CHECK(m.x == 0.0);
  CHECK(m.sigma == 1.0);
  CHECK_THROWS_AS((void)moments(std::vector<double>{0, 0.5, 0, 0.4, 0}, w), NotNormalized);
  CHECK_THROWS_AS((void)moments(std::vector<double>{1.0}, w), InvalidParameter);

  const SiteRange big{-200, 200};
  const auto rho = gaussian_density(WavePacketSpec{PacketKind::CoherentGaussian, 10.0, 0}, big);
  const auto g = moments(rho, big);
  CHECK(std::abs(g.x) < 1e-12);
  CHECK(g.sigma == doctest::Approx(10.0).epsilon(5e-3));

  // Reflection l -> -l of an asymmetric density flips x and keeps sigma.
  std::vector<double> p{0.1, 0.2, 0.3, 0.4, 0.0};
  std::vector<double> r(p.rbegin(), p.rend());
  const auto a = moments(p, w);
  const auto b = moments(r, w);
  CHECK(b.x == -a.x);
  CHECK(b.sigma == a.sigma);
}

TEST_CASE("single coherent run equals evolve") {
  const WavePacketSpec spec{PacketKind::CoherentGaussian, 10.0, 0};
  const LatticeParams p{1.0, 0.04, 0.0, 0.0, 10.0};
  const IntegratorConfig ic;
  EnsembleConfig ec;
  ec.n_realizations = 1;
  const SiteRange w{-255, 255};
  const auto series = run_ensemble(spec, p, ic, ec, 60.0, w);
  const auto traj = evolve(make_coherent(spec, w), p, ic, 60.0);
  REQUIRE(series.size() == traj.times.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    CHECK(series.times[i] == traj.times[i]);
    CHECK(series.x[i] == traj.x(i));
    CHECK(series.sigma2[i] == doctest::Approx(traj.sigma2(i)).epsilon(1e-12));
    CHECK(series.stderr_sigma2[i] == 0.0);
    CHECK(series.sigma[i] == doctest::Approx(std::sqrt(series.sigma2[i])));
  }
}

TEST_CASE("ensemble determinism and averaging") {
  const WavePacketSpec spec{PacketKind::IncoherentGaussian, 10.0, 0};
  const LatticeParams p{1.0, 0.0, 0.0, 0.0, 20.0};
  IntegratorConfig ic;
  ic.snapshot_times = {0.0, 15.0, 30.0};
  EnsembleConfig ec;
  ec.n_realizations = 6;
  ec.master_seed = 77;
  ec.density = true;
  ec.threads = 1;
  const SiteRange w{-255, 255};
  const auto a = run_ensemble(spec, p, ic, ec, 30.0, w);
  ec.threads = 4;
  const auto b = run_ensemble(spec, p, ic, ec, 30.0, w);
  CHECK(a.sigma2 == b.sigma2);
  CHECK(a.x == b.x);
  REQUIRE(a.snapshots.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) CHECK(a.snapshots[j].density == b.snapshots[j].density);

  // Realization k is an ordinary run from realization_seed(master, k).
  std::vector<std::vector<double>> dens;
  for (int k = 0; k < ec.n_realizations; ++k) {
    const auto s = make_incoherent_realization(spec, w, realization_seed(77, k));
    const auto t = evolve(s, p, ic, 30.0);
    CHECK(t.second_moment == a.realization_m2[static_cast<std::size_t>(k)]);
    dens.push_back(t.snapshots[2].density);
  }
  const auto& avg = a.snapshots[2].density;
  double total = 0.0;
  for (std::size_t i = 0; i < avg.size(); ++i) {
    double lo = 1.0;
    double hi = 0.0;
    for (const auto& d : dens) {
      lo = std::min(lo, d[i]);
      hi = std::max(hi, d[i]);
    }
    CHECK(avg[i] >= lo * (1 - 1e-12));
    CHECK(avg[i] <= hi * (1 + 1e-12));
    total += avg[i];
  }
  CHECK(std::abs(total - 1.0) < 1e-8);
  // Moments of the averaged density are the series values.
  const auto m = moments(avg, w);
  CHECK(m.x == doctest::Approx(a.x.back()).epsilon(1e-9));
  CHECK(m.sigma == doctest::Approx(a.sigma.back()).epsilon(1e-9));
}

TEST_CASE("engine errors carry the realization index") {
  const WavePacketSpec spec{PacketKind::IncoherentGaussian, 5.0, 0};
  const LatticeParams p{1.0, 0.0};
  EnsembleConfig ec;
  ec.n_realizations = 3;
  try {
    (void)run_ensemble(spec, p, IntegratorConfig{}, ec, 200.0, SiteRange{-63, 63});
    FAIL("expected EdgeContamination");
  } catch (const EdgeContamination& e) {
    REQUIRE(e.realization().has_value());
    CHECK(*e.realization() == 0);
    CHECK(std::string(e.what()).find("realization 0") != std::string::npos);
  }
  EnsembleConfig bad;
  bad.n_realizations = 0;
  CHECK_THROWS_AS((void)run_ensemble(spec, p, IntegratorConfig{}, bad, 1.0), InvalidParameter);
}

TEST_CASE("standard error of sigma^2 with 10 realizations") {
  // Tilted interacting lattice at t = 500 T_J.
  const WavePacketSpec spec{PacketKind::IncoherentGaussian, 10.0, 0};
  const LatticeParams p{1.0, 0.04, 0.0, 0.0, 10.0};
  IntegratorConfig ic;
  ic.sampling_stride = 1000;
  EnsembleConfig ec;
  ec.master_seed = 2024;
  const auto s = run_ensemble(spec, p, ic, ec, 500.0 * p.tunneling_period());
  const double rel = s.stderr_sigma2.back() / s.sigma2.back();
  MESSAGE("relative standard error " << rel);
  CHECK(rel < 0.05);
}

TEST_CASE("subdiffusion fit on exact power laws") {
  const auto t = linear_times(1000.0, 2000);
  auto half = synthetic(t, [](double x) { return std::sqrt(x); });
  auto r = fit_subdiffusion(half);
  CHECK(r.nu == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(r.t_lo < r.t_hi);
  CHECK(r.points >= 10);
  CHECK(r.r_squared == doctest::Approx(1.0));
  CHECK_FALSE(r.nu_stderr.has_value());
  auto ballistic = synthetic(t, [](double x) { return 3.0 * x * x; });
  CHECK(fit_subdiffusion(ballistic).nu == doctest::Approx(2.0).epsilon(1e-6));
  // Window independence.
  for (double lo : {1.0, 30.0, 500.0}) {
    FitWindowPolicy pol;
    pol.t_lo = lo;
    pol.t_hi = 900.0;
    CHECK(std::abs(fit_subdiffusion(half, pol).nu - 0.5) < 1e-6);
  }
}

TEST_CASE("subdiffusion fit window policy") {
  // Tilted series: the default window skips the first 10 Bloch periods.
  auto s = synthetic(linear_times(5000.0, 5000), [](double x) { return 1.0 + x; });
  s.params = LatticeParams{1.0, 0.05};
  const double TB = s.params.bloch_period();
  const auto r = fit_subdiffusion(s);
  CHECK(r.t_lo == doctest::Approx(std::max(10.0 * TB, 500.0)));
  CHECK(r.t_hi == 5000.0);
  // Too short a series.
  auto shorter = synthetic(linear_times(20.0 * TB, 1000), [](double x) { return x; });
  shorter.params = s.params;
  CHECK_THROWS_AS((void)fit_subdiffusion(shorter), WindowTooShort);
  // Too few points.
  auto sparse = synthetic(linear_times(1000.0, 20), [](double x) { return x; });
  CHECK_THROWS_AS((void)fit_subdiffusion(sparse), WindowTooShort);
}

TEST_CASE("jackknife error of nu") {
  // Realizations differing by a constant factor share the exponent.
  const auto t = linear_times(1000.0, 1000);
  std::vector<std::vector<double>> m1;
  std::vector<std::vector<double>> m2;
  for (int k = 0; k < 5; ++k) {
    m1.emplace_back(t.size(), 0.0);
    std::vector<double> row(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) row[i] = (1.0 + 0.1 * k) * std::pow(t[i], 0.4);
    m2.push_back(row);
  }
  const auto s = reduce_moments(t, m1, m2);
  const auto r = fit_subdiffusion(s);
  CHECK(r.nu == doctest::Approx(0.4).epsilon(1e-9));
  REQUIRE(r.nu_stderr.has_value());
  CHECK(*r.nu_stderr < 1e-9);
}

TEST_CASE("ballistic rate fit") {
  const auto t = linear_times(300.0, 300);
  auto s = synthetic(t, [](double x) { return 100.0 + 2.0 * x + 0.5 * x * x; });
  CHECK(ballistic_rate_fit(s, 50.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
  CHECK_THROWS_AS((void)ballistic_rate_fit(s, 299.0), WindowTooShort);
}

TEST_CASE("suppression coefficient") {
  const WavePacketSpec spec{PacketKind::IncoherentGaussian, 10.0, 0};
  EnsembleConfig ec;
  ec.n_realizations = 2;
  const LatticeParams p0{1.0, 0.0, 0.0, 0.0, 0.0};
  const auto s0 = run_ensemble(spec, p0, IntegratorConfig{}, ec, 20.0);
  for (double c : suppression_coefficient(s0, s0)) CHECK(c == 1.0);
  LatticeParams pg = p0;
  pg.g = 20.0;
  const auto sg = run_ensemble(spec, pg, IntegratorConfig{}, ec, 20.0);
  const auto c = suppression_coefficient(sg, s0);
  CHECK(c.front() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.back() < 1.0);
  const auto longer = run_ensemble(spec, pg, IntegratorConfig{}, ec, 25.0);
  CHECK_THROWS_AS((void)suppression_coefficient(longer, s0), GridMismatch);
  LatticeParams tilted = pg;
  tilted.dF = 0.01;
  const auto st = run_ensemble(spec, tilted, IntegratorConfig{}, ec, 20.0);
  CHECK_THROWS_AS((void)suppression_coefficient(st, s0), GridMismatch);
}
