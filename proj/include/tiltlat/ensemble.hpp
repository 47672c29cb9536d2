#pragma once

// Random-phase ensembles and the observables derived from them: moments of
// the phase-averaged density, subdiffusion exponents, ballistic rates and the
// interaction suppression coefficient.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tiltlat/dnlse.hpp"
#include "tiltlat/lattice.hpp"

namespace tiltlat {

struct EnsembleConfig {
  int n_realizations = 10;
  std::uint64_t master_seed = 0;
  bool second_moment = true;  ///< keep per-realization moment series
  bool density = false;       ///< average densities at the snapshot times
  /// Worker threads; 0 uses the hardware concurrency. Results do not depend on it.
  unsigned threads = 0;

  void validate() const;
};

/// Realization counts that converge sigma^2 and P_l respectively.
inline constexpr int kDefaultRealizationsSecondMoment = 10;
inline constexpr int kDefaultRealizationsDensity = 100;

struct Moments {
  double x = 0.0;
  double sigma = 0.0;
};

/// x = sum l P_l, sigma = sqrt(sum l^2 P_l - x^2). Throws NotNormalized when
/// sum P_l deviates from one by more than 1e-6.
[[nodiscard]] Moments moments(std::span<const double> density, SiteRange window);

struct AveragedSnapshot {
  double time = 0.0;
  std::vector<double> density;  ///< realization mean of |c_l|^2
};

/// Ensemble time series. x, sigma and sigma2 are the moments of the
/// realization-averaged density; stderr_sigma2 is the standard error of
/// sum l^2 P_l across realizations.
struct ObservableSeries {
  std::vector<double> times;
  std::vector<double> x;
  std::vector<double> sigma;
  std::vector<double> sigma2;
  std::vector<double> stderr_sigma2;
  std::vector<AveragedSnapshot> snapshots;
  SiteRange window;

  /// Raw per-realization moments, [realization][sample]; empty if not kept.
  std::vector<std::vector<double>> realization_m1;
  std::vector<std::vector<double>> realization_m2;

  // Provenance.
  WavePacketSpec spec;
  LatticeParams params;
  IntegratorConfig integrator;
  EnsembleConfig ensemble;
  double dt = 0.0;

  [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
  /// Standard error of sigma, stderr_sigma2 / (2 sigma).
  [[nodiscard]] double stderr_sigma(std::size_t i) const;
};

/// Builds an ObservableSeries from raw per-realization moment series
/// (averaging in realization order).
[[nodiscard]] ObservableSeries reduce_moments(std::vector<double> times,
                                              std::vector<std::vector<double>> m1,
                                              std::vector<std::vector<double>> m2);

/// Runs the ensemble: realization k starts from make_initial_state(spec,
/// window, realization_seed(master_seed, k)). Densities are averaged over
/// realizations before the moments are taken. Output is identical for any
/// thread count. Engine failures are rethrown with the realization index.
[[nodiscard]] ObservableSeries run_ensemble(const WavePacketSpec& spec, const LatticeParams& params,
                                            const IntegratorConfig& integrator,
                                            const EnsembleConfig& ensemble, double t_final,
                                            std::optional<SiteRange> window = std::nullopt);

struct FitWindowPolicy {
  std::optional<double> t_lo;  ///< explicit bounds override the defaults
  std::optional<double> t_hi;
  /// Default window: the last `decades` of available time ...
  double decades = 1.0;
  /// ... but never earlier than this many Bloch periods (tilted lattices).
  double transient_bloch_periods = 10.0;
  /// Minimal span of the series, in decades, past its first Bloch period.
  double min_series_decades = 1.5;
};

/// Power-law fit sigma^2 ~ t^nu.
struct FitResult {
  double nu = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
  /// Jackknife (leave one realization out) error of nu; unset when the series
  /// does not carry at least two realizations.
  std::optional<double> nu_stderr;
};

/// Least-squares slope of log sigma^2 against log t over the policy window.
/// Throws WindowTooShort when the window holds fewer than 10 samples or the
/// series is too short.
[[nodiscard]] FitResult fit_subdiffusion(const ObservableSeries& series,
                                         const FitWindowPolicy& policy = {});

/// Asymptotic ballistic rate: fits sigma^2 = a + b t + c t^2 for t >= t_lo and
/// returns sqrt(c).
[[nodiscard]] double ballistic_rate_fit(const ObservableSeries& series, double t_lo);

/// Pointwise C(t) = sigma(t; g) / sigma(t; g = 0). Throws GridMismatch unless
/// both series share the time grid, packet and parameters other than g.
[[nodiscard]] std::vector<double> suppression_coefficient(const ObservableSeries& series_g,
                                                          const ObservableSeries& series_0);

}  // namespace tiltlat
