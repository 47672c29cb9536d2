#include <doctest.h>

#include <cmath>
#include <numeric>

#include "tiltlat/lattice.hpp"

using namespace tiltlat;

namespace {

double second_moment_width(const std::vector<double>& rho, SiteRange w) {
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    s1 += w.site(i) * rho[i];
    s2 += double(w.site(i)) * w.site(i) * rho[i];
  }
  return std::sqrt(s2 - s1 * s1);
}

}  // namespace

TEST_CASE("derived quantities") {
  LatticeParams p{1.0, 0.04, 0.0, 0.0, 10.0};
  CHECK(p.bloch_frequency() == 0.04);
  CHECK(p.bloch_period() == doctest::Approx(2 * kPi / 0.04));
  CHECK(p.tunneling_period() == doctest::Approx(2 * kPi));
  CHECK(p.localization_length() == doctest::Approx(25.0));
  LatticeParams flat{};
  CHECK_THROWS_AS((void)flat.bloch_period(), ZeroTilt);
  CHECK_THROWS_AS((void)flat.localization_length(), ZeroTilt);
}

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(LatticeParams{}.validate());
  CHECK_THROWS_AS((LatticeParams{0.0}.validate()), InvalidParameter);
  CHECK_THROWS_AS((LatticeParams{1.0, -0.1}.validate()), InvalidParameter);
  CHECK_THROWS_AS((LatticeParams{1.0, 0.5, 0.3, 0.0}.validate()), InvalidParameter);
  CHECK_THROWS_AS((LatticeParams{1.0, 0.5, 0.0, 0.0, NAN}.validate()), InvalidParameter);
  CHECK_THROWS_AS((WavePacketSpec{PacketKind::CoherentGaussian, 0.5}.validate()), InvalidParameter);
}

TEST_CASE("coherent Gaussian") {
  const WavePacketSpec spec{PacketKind::CoherentGaussian, 10.0, 0};
  const SiteRange w{-512, 512};
  const auto s = make_coherent(spec, w);
  CHECK(s.time == 0.0);
  CHECK(std::abs(s.norm() - 1.0) < 1e-12);
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < s.amplitudes.size(); ++i) {
    CHECK(s.amplitudes[i].imag() == 0.0);
    CHECK(s.amplitudes[i].real() >= 0.0);
    if (std::abs(s.amplitudes[i]) > std::abs(s.amplitudes[argmax])) argmax = i;
  }
  CHECK(w.site(argmax) == 0);

  // Independent width: direct sum of the unnormalized discrete Gaussian.
  double z = 0.0;
  double m2 = 0.0;
  for (int l = -200; l <= 200; ++l) {
    const double e = std::exp(-0.5 * l * l / 100.0);
    z += e;
    m2 += double(l) * l * e;
  }
  const auto rho = s.density();
  const double width = second_moment_width(rho, w);
  CHECK(width == doctest::Approx(std::sqrt(m2 / z)).epsilon(1e-12));
  CHECK(std::abs(width - 10.0) < 0.05);
  double x = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) x += w.site(i) * rho[i];
  CHECK(std::abs(x) < 1e-10);
}

TEST_CASE("window truncation guard") {
  const WavePacketSpec spec{PacketKind::CoherentGaussian, 10.0, 0};
  CHECK_THROWS_AS((void)make_coherent(spec, SiteRange{-40, 40}), WindowTooNarrow);
  CHECK_NOTHROW((void)make_coherent(spec, SiteRange{-80, 80}));
  CHECK_THROWS_AS((void)make_coherent(spec, SiteRange{5, 300}), WindowTooNarrow);
}

TEST_CASE("incoherent realizations") {
  const WavePacketSpec spec{PacketKind::IncoherentGaussian, 10.0, 0};
  const SiteRange w{-255, 255};
  const auto a = make_incoherent_realization(spec, w, 42);
  const auto b = make_incoherent_realization(spec, w, 42);
  const auto c = make_incoherent_realization(spec, w, 43);
  CHECK(a.amplitudes == b.amplitudes);
  CHECK(std::abs(a.norm() - 1.0) < 1e-12);
  bool phases_differ = false;
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i) {
    CHECK(std::norm(a.amplitudes[i]) == doctest::Approx(std::norm(c.amplitudes[i])).epsilon(1e-12));
    if (std::abs(std::arg(a.amplitudes[i]) - std::arg(c.amplitudes[i])) > 1e-6) phases_differ = true;
  }
  CHECK(phases_differ);

  // Phase of site l is independent of the window it is generated on.
  const auto wide = make_incoherent_realization(spec, SiteRange{-511, 511}, 42);
  CHECK(std::arg(wide.amplitude(7)) == doctest::Approx(std::arg(a.amplitude(7))));
}

TEST_CASE("phases are uniform on [0, 2pi)") {
  // Mean of exp(i theta) over many sites vanishes, and a histogram is flat.
  const WavePacketSpec spec{PacketKind::IncoherentGaussian, 1000.0, 0};
  const SiteRange w{-8000, 8000};
  const auto s = make_incoherent_realization(spec, w, 7);
  complex mean{};
  std::array<int, 8> bins{};
  for (const auto& c : s.amplitudes) {
    const double th = std::arg(c) < 0 ? std::arg(c) + kTwoPi : std::arg(c);
    mean += std::polar(1.0, th);
    bins[static_cast<std::size_t>(th / kTwoPi * 8)]++;
  }
  const double n = double(s.amplitudes.size());
  CHECK(std::abs(mean) / n < 4.0 / std::sqrt(n));
  for (int b : bins) CHECK(std::abs(b - n / 8) < 5.0 * std::sqrt(n / 8));
}

TEST_CASE("ensemble-averaged density equals rho") {
  // |c_l|^2 is seed independent, so the average over 100 realizations equals
  // rho_l; the spread across realizations is zero.
  const WavePacketSpec spec{PacketKind::IncoherentGaussian, 10.0, 0};
  const SiteRange w{-127, 127};
  const auto rho = gaussian_density(spec, w);
  std::vector<double> avg(w.size(), 0.0);
  for (int k = 0; k < 100; ++k) {
    const auto s = make_incoherent_realization(spec, w, realization_seed(9, k));
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += std::norm(s.amplitudes[i]) / 100.0;
  }
  for (std::size_t i = 0; i < avg.size(); ++i) CHECK(avg[i] == doctest::Approx(rho[i]).epsilon(1e-12));
}

TEST_CASE("counter-based seeding") {
  static_assert(mix64(0) == 0xE220A8397B1DCDAFULL);
  CHECK(realization_seed(1, 0) != realization_seed(1, 1));
  CHECK(realization_seed(1, 0) != realization_seed(2, 0));
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const double u = uniform01(5, i);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("auto window") {
  const WavePacketSpec spec{PacketKind::CoherentGaussian, 10.0, 0};
  const auto w = auto_window(spec, LatticeParams{1.0, 0.04});
  CHECK(w == SiteRange{-511, 511});
  // Small tilt: 4 L dominates.
  const auto w2 = auto_window(spec, LatticeParams{1.0, 0.002});
  CHECK(w2.l_max >= 2000);
  CHECK(((w2.l_max + 1) & w2.l_max) == 0);
  // Untilted: ballistic reach over the run.
  const auto w3 = auto_window(spec, LatticeParams{1.0, 0.0}, 1500.0);
  CHECK(w3.l_max >= 1580);
  const auto shifted = auto_window(WavePacketSpec{PacketKind::CoherentGaussian, 10.0, 100}, LatticeParams{1.0, 0.04});
  CHECK(shifted.l_min == 100 - 511);
}

TEST_CASE("global phase leaves densities unchanged") {
  const WavePacketSpec spec{PacketKind::CoherentGaussian, 10.0, 0};
  auto s = make_coherent(spec, SiteRange{-127, 127});
  const auto before = s.density();
  for (auto& c : s.amplitudes) c *= std::polar(1.0, 0.7);
  const auto after = s.density();
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(after[i] == doctest::Approx(before[i]).epsilon(1e-14));
}

TEST_CASE("packet kind names") {
  CHECK(packet_kind_from_string(to_string(PacketKind::CoherentGaussian)) == PacketKind::CoherentGaussian);
  CHECK(packet_kind_from_string("incoherent") == PacketKind::IncoherentGaussian);
  CHECK_THROWS_AS((void)packet_kind_from_string("thomas-fermi"), InvalidParameter);
}
