#pragma once

// Shared domain types of the driven tilted lattice: physical parameters,
// site windows, complex site amplitudes and Gaussian initial conditions.
//
// Units: hbar = 1 and the lattice period d = 1, so the static tilt dF is both
// an energy and the Bloch frequency, and positions are site indices.

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tiltlat/errors.hpp"

namespace tiltlat {

using complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Parameters of H = -(J/2) sum (|l+1><l| + h.c.) + [dF + dFomega cos(omega t)] sum l |l><l|
/// plus the on-site mean-field interaction g |c_l|^2.
struct LatticeParams {
  double J = 1.0;        ///< hopping energy
  double dF = 0.0;       ///< static tilt per site
  double dFomega = 0.0;  ///< AC drive amplitude per site
  double omega = 0.0;    ///< drive angular frequency
  double g = 0.0;        ///< nonlinear interaction constant

  /// Throws InvalidParameter unless J > 0, dF >= 0, dFomega >= 0 and
  /// omega > 0 whenever the drive is on. The sign of g is not constrained.
  void validate() const;

  [[nodiscard]] bool tilted() const noexcept { return dF > 0.0; }
  [[nodiscard]] bool driven() const noexcept { return dFomega > 0.0; }

  [[nodiscard]] double bloch_frequency() const noexcept { return dF; }
  /// 2 pi / omega_B; throws ZeroTilt when dF == 0.
  [[nodiscard]] double bloch_period() const;
  [[nodiscard]] double tunneling_period() const noexcept { return kTwoPi / J; }
  /// Stark localization length J / dF; throws ZeroTilt when dF == 0.
  [[nodiscard]] double localization_length() const;
  /// omega_B - omega.
  [[nodiscard]] double detuning() const noexcept { return dF - omega; }
  /// Drive modulation index dFomega / omega (0 when undriven).
  [[nodiscard]] double drive_index() const noexcept { return driven() ? dFomega / omega : 0.0; }

  friend bool operator==(const LatticeParams&, const LatticeParams&) = default;
};

/// Contiguous, inclusive range of site indices.
struct SiteRange {
  int l_min = 0;
  int l_max = 0;

  [[nodiscard]] std::size_t size() const noexcept {
    return static_cast<std::size_t>(l_max - l_min + 1);
  }
  [[nodiscard]] bool contains(long l) const noexcept { return l >= l_min && l <= l_max; }
  [[nodiscard]] int site(std::size_t index) const noexcept {
    return l_min + static_cast<int>(index);
  }
  [[nodiscard]] std::size_t index(int l) const noexcept {
    return static_cast<std::size_t>(l - l_min);
  }
  [[nodiscard]] static SiteRange symmetric(int center, int half_width) {
    return {center - half_width, center + half_width};
  }

  friend bool operator==(const SiteRange&, const SiteRange&) = default;
};

/// Complex amplitudes c_l on a window of sites at a given time.
struct LatticeState {
  SiteRange window;
  std::vector<complex> amplitudes;
  double time = 0.0;

  [[nodiscard]] complex amplitude(int l) const {
    return window.contains(l) ? amplitudes[window.index(l)] : complex{};
  }
  [[nodiscard]] double norm() const noexcept;
  [[nodiscard]] std::vector<double> density() const;
};

enum class PacketKind { CoherentGaussian, IncoherentGaussian };

[[nodiscard]] std::string_view to_string(PacketKind kind) noexcept;
[[nodiscard]] PacketKind packet_kind_from_string(std::string_view name);

/// Initial-condition recipe. sigma0 >= 1 is required; widths below 5 sites
/// trigger a warning on stderr since the Gaussian is then poorly resolved.
struct WavePacketSpec {
  PacketKind kind = PacketKind::CoherentGaussian;
  double sigma0 = 10.0;
  int center = 0;

  void validate() const;

  friend bool operator==(const WavePacketSpec&, const WavePacketSpec&) = default;
};

/// Gaussian densities rho_l ∝ exp(-(l-center)^2 / 2 sigma0^2), normalized to
/// sum exactly to one over the window. Throws WindowTooNarrow when the
/// Gaussian mass outside the window exceeds 1e-12.
[[nodiscard]] std::vector<double> gaussian_density(const WavePacketSpec& spec, SiteRange window);

/// c_l = sqrt(rho_l), all phases zero, time 0.
[[nodiscard]] LatticeState make_coherent(const WavePacketSpec& spec, SiteRange window);

/// c_l = sqrt(rho_l) exp(i theta_l); theta_l uniform on [0, 2 pi) drawn from
/// the counter-based stream of `seed`. Bit-identical for identical inputs.
[[nodiscard]] LatticeState make_incoherent_realization(const WavePacketSpec& spec,
                                                       SiteRange window, std::uint64_t seed);

/// Dispatches on spec.kind; `seed` is ignored for coherent packets.
[[nodiscard]] LatticeState make_initial_state(const WavePacketSpec& spec, SiteRange window,
                                              std::uint64_t seed);

/// Default window [center - W + 1, center + W - 1] (2W - 1 sites, which makes
/// the hopping transform a power-of-two FFT). W is the power of two at or above
/// max(8 sigma0, 4 L, 4 |L_eff|, 512). Without a tilt, and for near-resonant
/// driving where the effective localization length diverges, the packet
/// spreads ballistically; when `t_final` is known the corresponding reach
/// 8 sigma0 + J t_final (or |J_eff| t_final + 4 L when driven) replaces the
/// unbounded length.
[[nodiscard]] SiteRange auto_window(const WavePacketSpec& spec, const LatticeParams& params,
                                    std::optional<double> t_final = std::nullopt);

// Counter-based random numbers. Draw i of stream s is a pure function of
// (s, i), so realizations can be generated in any order or in parallel.

/// SplitMix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Child seed of realization k: mix64(master ^ mix64(k)).
[[nodiscard]] constexpr std::uint64_t realization_seed(std::uint64_t master,
                                                       std::uint64_t k) noexcept {
  return mix64(master ^ mix64(k));
}

/// Uniform double on [0, 1) with 53 random bits: draw `counter` of stream `seed`.
[[nodiscard]] constexpr double uniform01(std::uint64_t seed, std::uint64_t counter) noexcept {
  return static_cast<double>(mix64(seed + mix64(counter)) >> 11) * 0x1.0p-53;
}

}  // namespace tiltlat
