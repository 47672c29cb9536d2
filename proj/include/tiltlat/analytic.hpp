#pragma once

// Closed-form single-particle (g = 0) results for the tilted and driven
// lattice, and the effective stationary-lattice model of near-resonant
// driving. These are the reference values the integrator is checked against.

#include <optional>
#include <vector>

#include "tiltlat/lattice.hpp"

namespace tiltlat::analytic {

/// Bessel function of the first kind J_n(z), integer order. Miller downward
/// recurrence normalized with J_0 + 2 sum J_2k = 1; power series for |z| < 1.
/// Absolute error below 1e-10 for |n| <= 1e4 and |z| <= 1e4, otherwise throws
/// OutOfRange.
[[nodiscard]] double bessel_j(int n, double z);

/// J_0(z) .. J_nmax(z) in one recurrence sweep.
[[nodiscard]] std::vector<double> bessel_j_sequence(int n_max, double z);

/// Amplitudes a_l = J_{l-m}(J/dF) of the m-th Wannier–Stark state on `window`.
/// The window must contain [m - 4z, m + 4z] with z = J/dF.
[[nodiscard]] std::vector<double> wannier_stark_state(int m, const LatticeParams& params,
                                                      SiteRange window);

/// Position-operator matrix element <m| sum_l l |l><l| |m'> in the
/// Wannier–Stark basis: m on the diagonal, z/2 on the first off-diagonals.
[[nodiscard]] double ws_dipole_element(int m, int m_prime, const LatticeParams& params);

/// Bloch-oscillation center L [1 - cos(omega_B t)] of a coherent packet.
[[nodiscard]] double bo_center(double t, const LatticeParams& params);

/// Breathing-mode width sqrt(sigma0^2 + 2 L^2 sin^2(omega_B t / 2)) of an
/// incoherent packet.
[[nodiscard]] double breathing_width(double t, double sigma0, const LatticeParams& params);

enum class BallisticRegime {
  SlowCoherent,   ///< sqrt(sigma0^2 + (J t / 2 sigma0)^2)
  FastIncoherent  ///< sqrt(sigma0^2 + 2 (J t / 2)^2)
};

/// Ballistic width in the untilted lattice.
[[nodiscard]] double ballistic_width(double t, double sigma0, double J, BallisticRegime regime);

/// Asymptotic d sigma / dt of ballistic_width: J / 2 sigma0 or J / sqrt 2.
[[nodiscard]] double ballistic_rate(double sigma0, double J, BallisticRegime regime);

/// chi(t) = J sum_n J_n(-a) e^{-i dw_n t/2} sin(dw_n t/2) / dw_n with a the drive
/// index dFomega / omega and dw_n = omega_B - n omega. The negative Bessel
/// argument matches the +dFomega cos(omega t) drive of the Hamiltonian; with
/// J_n(+a) the moments describe the opposite drive phase.
struct ChiValue {
  complex value;

  [[nodiscard]] double modulus() const noexcept { return std::abs(value); }
  /// Principal argument in (-pi, pi].
  [[nodiscard]] double phase() const noexcept { return std::arg(value); }
};

struct ChiOptions {
  /// Largest |n| kept. When unset the sum runs to max(5, ceil(a) + 10) and is
  /// extended until the first omitted Bessel factor is below 1e-12.
  std::optional<int> n_max;
  /// Terms with |dw_n| below this use their exact resonant limit t / 2.
  /// Unset means 1e-9 max(omega_B, omega).
  std::optional<double> eps_resonance;
};

/// Truncation threshold on the first omitted Bessel factor.
inline constexpr double kChiTruncationTolerance = 1e-12;

/// Default number of terms for a given drive index (see ChiOptions::n_max).
[[nodiscard]] int chi_default_terms(double drive_index);

/// Throws BadTruncation when an explicit n_max leaves a Bessel factor above
/// kChiTruncationTolerance, InvalidParameter if the parameters are invalid.
[[nodiscard]] ChiValue chi(double t, const LatticeParams& params, const ChiOptions& options = {});

/// Coherent driven packet center 2 |chi| sin(arg chi).
[[nodiscard]] double driven_center(double t, const LatticeParams& params,
                                   const ChiOptions& options = {});

/// Incoherent driven packet width sqrt(sigma0^2 + 2 |chi|^2).
[[nodiscard]] double driven_width(double t, double sigma0, const LatticeParams& params,
                                  const ChiOptions& options = {});

/// Height growth rate J |J_n(a)| / sqrt 2 of the n-th resonance peak
/// (omega = omega_B / n) of driven_width.
[[nodiscard]] double resonance_peak_slope(int n, const LatticeParams& params);

/// Tail envelope J |J_n(a)| / |dw_n| of the n-th resonance. It bounds the
/// n-th term of |chi|; the corresponding width is sqrt(sigma0^2 + 2 env^2).
[[nodiscard]] double resonance_envelope(int n, const LatticeParams& params);

enum class EffectiveVariant {
  RWA,             ///< J_eff = (J/2) (dFomega / dF)
  BesselCorrected  ///< J_eff = J J_1(dFomega / dF)
};

/// Stationary-lattice model of near-resonant driving (omega ≈ omega_B).
struct EffectiveModel {
  double J_eff = 0.0;
  double dF_eff = 0.0;             ///< omega_B - omega
  std::optional<double> L_eff;     ///< J_eff / dF_eff, unset at exact resonance
  EffectiveVariant variant = EffectiveVariant::BesselCorrected;
};

/// Throws ZeroTilt when dF == 0.
[[nodiscard]] EffectiveModel effective_model(const LatticeParams& params,
                                             EffectiveVariant variant = EffectiveVariant::BesselCorrected);

}  // namespace tiltlat::analytic
