#pragma once

// Time integration of the driven discrete nonlinear Schrödinger equation
//
//   i dc_l/dt = -(J/2)(c_{l+1} + c_{l-1}) + [dF + dFomega cos(omega t)] l c_l + g |c_l|^2 c_l
//
// on a finite window with hard-wall ends.
//
// Scheme: second-order symmetric (Strang) splitting, local(dt/2) hop(dt)
// local(dt/2). The local part (tilt, drive and interaction) is diagonal and
// is applied as an exact phase, with the drive integrated in closed form over
// the sub-step. The hopping part is the exact exponential of the open-chain
// tridiagonal matrix, applied in its eigenbasis through a type-I discrete
// sine transform. Both factors are unitary, so the norm is conserved to
// rounding.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "tiltlat/lattice.hpp"

namespace tiltlat {

inline constexpr std::string_view kSchemeName = "strang-split/dst-hop";
inline constexpr int kSchemeOrder = 2;

struct IntegratorConfig {
  /// Time step; 0 selects T_J / 200, capped at (2 pi / omega) / 100 when driven.
  double dt = 0.0;
  /// Observer and recorded samples every `sampling_stride` steps (plus the
  /// initial and final instants).
  std::size_t sampling_stride = 100;
  /// Largest tolerated mass in the outer 1% of sites on either side.
  double edge_guard_threshold = 1e-8;
  /// Additional sampling instants at which density snapshots are recorded;
  /// each is rounded to the nearest step.
  std::vector<double> snapshot_times;
  /// Record the density at every sample, not only at snapshot times.
  bool record_densities = false;

  /// The step actually requested (before rounding to hit t_final exactly).
  [[nodiscard]] double resolved_dt(const LatticeParams& params) const;
  /// Throws InvalidParameter when dt exceeds T_J/100 or a hundredth of the
  /// drive period, or when the stride is zero.
  void validate(const LatticeParams& params) const;
};

/// Exact-phase split-step propagator bound to one window, parameter set and
/// step size. Owns its work buffer; not copyable. Planning is serialized
/// internally, so distinct propagators may be built and used from any thread.
class SplitStepPropagator {
 public:
  SplitStepPropagator(SiteRange window, const LatticeParams& params, double dt);
  ~SplitStepPropagator();
  SplitStepPropagator(SplitStepPropagator&&) noexcept;
  SplitStepPropagator& operator=(SplitStepPropagator&&) noexcept;
  SplitStepPropagator(const SplitStepPropagator&) = delete;
  SplitStepPropagator& operator=(const SplitStepPropagator&) = delete;

  [[nodiscard]] SiteRange window() const noexcept;
  [[nodiscard]] double dt() const noexcept;

  /// Amplitudes the propagator acts on (window order).
  [[nodiscard]] std::span<complex> amplitudes() noexcept;
  [[nodiscard]] std::span<const complex> amplitudes() const noexcept;
  void load(std::span<const complex> c);

  /// Exact local evolution from t0 to t1: tilt, drive and interaction phases.
  void local(double t0, double t1) noexcept;
  /// Exact hopping evolution over one dt.
  void hop() noexcept;
  /// local(t, t + dt/2), hop(), local(t + dt/2, t + dt).
  void step(double t) noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One symmetric step of length dt starting at time t. The result carries
/// time t + dt.
[[nodiscard]] LatticeState step(const LatticeState& state, const LatticeParams& params, double t,
                                double dt);

struct SampleInfo {
  std::size_t index = 0;   ///< sample number
  std::size_t step = 0;    ///< integration step count at this instant
  bool snapshot = false;   ///< instant requested through snapshot_times
};

using Observer = std::function<void(const LatticeState&, const SampleInfo&)>;

struct DensitySnapshot {
  double time = 0.0;
  std::vector<double> density;
};

struct TrajectoryProvenance {
  LatticeParams params;
  IntegratorConfig config;
  SiteRange window;
  double dt = 0.0;  ///< step used, t_final / steps
  std::size_t steps = 0;
  std::uint64_t seed = 0;
};

/// Samples of one integrated run. first/second moments are the raw sums
/// sum l P_l and sum l^2 P_l of the realization's own density.
struct Trajectory {
  std::vector<double> times;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::vector<double> norm;
  std::vector<DensitySnapshot> snapshots;
  LatticeState final_state;
  TrajectoryProvenance provenance;

  [[nodiscard]] double x(std::size_t i) const { return first_moment[i]; }
  [[nodiscard]] double sigma2(std::size_t i) const {
    return second_moment[i] - first_moment[i] * first_moment[i];
  }
};

/// Integrates from state.time to t_final with the configured step (rounded
/// down so that t_final is hit exactly).
///
/// Throws EdgeContamination when the outer 1% of sites on either side holds
/// more than edge_guard_threshold of the mass, and StepUnstable when the norm
/// drifts by more than 1e-6 per step or becomes non-finite.
[[nodiscard]] Trajectory evolve(LatticeState state, const LatticeParams& params,
                                const IntegratorConfig& config, double t_final,
                                const Observer& observer = {});

/// sum_l [-J Re(c*_{l+1} c_l) + dF l |c_l|^2 + (g/2) |c_l|^4]; conserved when
/// the drive is off.
[[nodiscard]] double energy(const LatticeState& state, const LatticeParams& params);

/// Largest of the two edge masses (outer 1% of sites, at least one site).
[[nodiscard]] double edge_mass(std::span<const complex> amplitudes);

}  // namespace tiltlat
