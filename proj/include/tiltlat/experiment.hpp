#pragma once

// Scenarios, parameter scans and figure presets. An ExperimentConfig is a list
// of ensemble runs and scans sharing one master seed; it serializes to JSON
// (see io.hpp) so every output directory can be regenerated from its sidecar.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tiltlat/ensemble.hpp"

namespace tiltlat {

[[nodiscard]] std::string_view version() noexcept;

enum class ScanAxis { Frequency, Amplitude };
enum class ScanMode { Analytic, Numeric };

[[nodiscard]] std::string_view to_string(ScanAxis axis) noexcept;
[[nodiscard]] std::string_view to_string(ScanMode mode) noexcept;
[[nodiscard]] ScanAxis scan_axis_from_string(std::string_view name);
[[nodiscard]] ScanMode scan_mode_from_string(std::string_view name);

/// sigma(t_eval) against the drive frequency omega or the amplitude ratio
/// dFomega / dF. The grid value replaces the scanned parameter in `params`;
/// everything else is held fixed.
struct ScanConfig {
  std::string label;
  ScanAxis axis = ScanAxis::Frequency;
  ScanMode mode = ScanMode::Analytic;
  std::vector<double> grid;
  LatticeParams params;
  WavePacketSpec spec{PacketKind::IncoherentGaussian, 10.0, 0};
  double t_eval = 0.0;
  IntegratorConfig integrator;
  EnsembleConfig ensemble;

  /// Throws ConfigError unless the grid is nonempty and strictly increasing
  /// and t_eval > 0.
  void validate() const;
  /// Parameters at one grid value.
  [[nodiscard]] LatticeParams params_at(double value) const;
};

struct ScanPoint {
  double value = 0.0;
  double sigma = 0.0;
  double stderr_sigma = 0.0;  ///< zero in analytic mode
};

struct ScanTable {
  ScanAxis axis = ScanAxis::Frequency;
  std::vector<ScanPoint> points;
};

/// Evaluates one grid point: driven_width (analytic) or the ensemble width
/// at t_eval (numeric). Every point uses the same master seed, so points are
/// independent of each other and of the grid order.
[[nodiscard]] ScanPoint scan_point(const ScanConfig& cfg, double value);

/// Requires axis == Frequency; throws ConfigError otherwise.
[[nodiscard]] ScanTable frequency_scan(const ScanConfig& cfg);
/// Requires axis == Amplitude; throws ConfigError otherwise.
[[nodiscard]] ScanTable amplitude_scan(const ScanConfig& cfg);
/// Dispatches on cfg.axis.
[[nodiscard]] ScanTable run_scan(const ScanConfig& cfg);

/// One ensemble run of the DNLSE.
struct RunConfig {
  std::string label;
  WavePacketSpec spec;
  LatticeParams params;
  IntegratorConfig integrator;
  EnsembleConfig ensemble;
  double t_final = 0.0;
  std::optional<SiteRange> window;  ///< auto-sized when unset

  void validate() const;
};

struct ExperimentConfig {
  std::string preset;  ///< informational; empty for hand-written configs
  std::uint64_t seed = 0;
  std::vector<RunConfig> runs;
  std::vector<ScanConfig> scans;

  /// Checks every run and scan and the uniqueness of labels.
  void validate() const;
  /// Writes `seed` into every ensemble config.
  void apply_seed();
  /// Fills in resolved time steps and windows so the config reproduces a run
  /// without relying on defaults.
  void resolve();
};

/// Command-line style overrides applied on top of a preset or config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> realizations;
  std::optional<double> t_final;  ///< also replaces scan evaluation times
  std::optional<double> dt;
};

void apply_overrides(ExperimentConfig& cfg, const Overrides& overrides);

[[nodiscard]] const std::vector<std::string>& preset_names();
/// Throws UnknownPreset for names outside preset_names().
[[nodiscard]] ExperimentConfig make_preset(std::string_view name);

struct RunResult {
  std::string label;
  ObservableSeries series;
};

struct ScanResult {
  std::string label;
  ScanTable table;
};

struct ExperimentResult {
  std::vector<RunResult> runs;
  std::vector<ScanResult> scans;
};

[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace tiltlat
