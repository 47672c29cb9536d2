#include "tiltlat/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tiltlat/analytic.hpp"

#ifndef TILTLAT_VERSION
#define TILTLAT_VERSION "unknown"
#endif

namespace tiltlat {

std::string_view version() noexcept { return TILTLAT_VERSION; }

std::string_view to_string(ScanAxis axis) noexcept {
  return axis == ScanAxis::Frequency ? "frequency" : "amplitude";
}

std::string_view to_string(ScanMode mode) noexcept {
  return mode == ScanMode::Analytic ? "analytic" : "numeric";
}

ScanAxis scan_axis_from_string(std::string_view name) {
  if (name == "frequency") return ScanAxis::Frequency;
  if (name == "amplitude") return ScanAxis::Amplitude;
  throw ConfigError("unknown scan axis '" + std::string(name) + "' (expected frequency or amplitude)");
}

ScanMode scan_mode_from_string(std::string_view name) {
  if (name == "analytic") return ScanMode::Analytic;
  if (name == "numeric") return ScanMode::Numeric;
  throw ConfigError("unknown scan mode '" + std::string(name) + "' (expected analytic or numeric)");
}

void ScanConfig::validate() const {
  if (grid.empty()) throw ConfigError("scan '" + label + "': grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw ConfigError("scan '" + label + "': grid must be strictly increasing");
  if (!(t_eval > 0.0)) throw ConfigError("scan '" + label + "': t_eval must be positive");
  if (axis == ScanAxis::Frequency && !(grid.front() > 0.0))
    throw ConfigError("scan '" + label + "': frequencies must be positive");
  if (axis == ScanAxis::Amplitude && grid.front() < 0.0)
    throw ConfigError("scan '" + label + "': amplitude ratios must be non-negative");
  if (axis == ScanAxis::Amplitude && !params.tilted())
    throw ConfigError("scan '" + label + "': amplitude scans are relative to dF, which is zero");
  if (mode == ScanMode::Numeric) ensemble.validate();
  spec.validate();
}

LatticeParams ScanConfig::params_at(double value) const {
  LatticeParams p = params;
  if (axis == ScanAxis::Frequency)
    p.omega = value;
  else
    p.dFomega = value * p.dF;
  return p;
}

ScanPoint scan_point(const ScanConfig& cfg, double value) {
  const LatticeParams p = cfg.params_at(value);
  if (cfg.mode == ScanMode::Analytic) {
    return {value, analytic::driven_width(cfg.t_eval, cfg.spec.sigma0, p), 0.0};
  }
  const auto series = run_ensemble(cfg.spec, p, cfg.integrator, cfg.ensemble, cfg.t_eval);
  const std::size_t last = series.size() - 1;
  return {value, series.sigma[last], series.stderr_sigma(last)};
}

namespace {

ScanTable scan_grid(const ScanConfig& cfg) {
  cfg.validate();
  ScanTable table{cfg.axis, {}};
  table.points.reserve(cfg.grid.size());
  for (double v : cfg.grid) table.points.push_back(scan_point(cfg, v));
  return table;
}

}  // namespace

ScanTable frequency_scan(const ScanConfig& cfg) {
  if (cfg.axis != ScanAxis::Frequency) throw ConfigError("frequency_scan needs a frequency axis");
  return scan_grid(cfg);
}

ScanTable amplitude_scan(const ScanConfig& cfg) {
  if (cfg.axis != ScanAxis::Amplitude) throw ConfigError("amplitude_scan needs an amplitude axis");
  return scan_grid(cfg);
}

ScanTable run_scan(const ScanConfig& cfg) {
  return cfg.axis == ScanAxis::Frequency ? frequency_scan(cfg) : amplitude_scan(cfg);
}

void RunConfig::validate() const {
  if (!(t_final > 0.0)) throw ConfigError("run '" + label + "': t_final must be positive");
  spec.validate();
  params.validate();
  integrator.validate(params);
  ensemble.validate();
  if (window) {
    if (window->l_min > window->l_max)
      throw ConfigError("run '" + label + "': window is empty");
    if (!window->contains(0)) throw ConfigError("run '" + label + "': window must contain site 0");
  }
}

void ExperimentConfig::validate() const {
  if (runs.empty() && scans.empty()) throw ConfigError("config defines no runs and no scans");
  std::set<std::string> labels;
  auto check_label = [&](const std::string& label) {
    if (label.empty()) throw ConfigError("every run and scan needs a label");
    if (label.find_first_of("/\\") != std::string::npos || label == "." || label == "..")
      throw ConfigError("label '" + label + "' is not a plain directory name");
    if (!labels.insert(label).second) throw ConfigError("duplicate label '" + label + "'");
  };
  for (const auto& r : runs) {
    check_label(r.label);
    r.validate();
  }
  for (const auto& s : scans) {
    check_label(s.label);
    s.validate();
  }
}

void ExperimentConfig::apply_seed() {
  for (auto& r : runs) r.ensemble.master_seed = seed;
  for (auto& s : scans) s.ensemble.master_seed = seed;
}

void ExperimentConfig::resolve() {
  for (auto& r : runs) {
    if (r.integrator.dt == 0.0) r.integrator.dt = r.integrator.resolved_dt(r.params);
    if (!r.window) r.window = auto_window(r.spec, r.params, r.t_final);
  }
}

void apply_overrides(ExperimentConfig& cfg, const Overrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  for (auto& r : cfg.runs) {
    if (o.realizations && r.spec.kind == PacketKind::IncoherentGaussian)
      r.ensemble.n_realizations = *o.realizations;
    if (o.t_final) {
      r.t_final = *o.t_final;
      // Snapshot instants beyond the new end are dropped.
      std::erase_if(r.integrator.snapshot_times, [&](double t) { return t > r.t_final; });
      // An auto-sized window depends on the duration.
      if (r.window) r.window.reset();
    }
    if (o.dt) r.integrator.dt = *o.dt;
  }
  for (auto& s : cfg.scans) {
    if (o.realizations && s.spec.kind == PacketKind::IncoherentGaussian)
      s.ensemble.n_realizations = *o.realizations;
    if (o.t_final) s.t_eval = *o.t_final;
    if (o.dt) s.integrator.dt = *o.dt;
  }
  cfg.apply_seed();
}

// ---------------------------------------------------------------------------
// Presets.

namespace {

constexpr std::uint64_t kPresetSeed = 20100101;

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return v;
}

std::string g_label(std::string_view prefix, double g) {
  return std::string(prefix) + "g" + std::to_string(static_cast<int>(g));
}

RunConfig make_run(std::string label, PacketKind kind, LatticeParams p, double t_final,
                   int realizations, std::vector<double> snapshots = {}) {
  RunConfig r;
  r.label = std::move(label);
  r.spec = {kind, 10.0, 0};
  r.params = p;
  r.t_final = t_final;
  r.ensemble.n_realizations = kind == PacketKind::CoherentGaussian ? 1 : realizations;
  r.ensemble.density = !snapshots.empty();
  r.integrator.snapshot_times = std::move(snapshots);
  return r;
}

ScanConfig make_scan(std::string label, ScanAxis axis, ScanMode mode, std::vector<double> grid,
                     LatticeParams p, double t_eval, int realizations = kDefaultRealizationsSecondMoment) {
  ScanConfig s;
  s.label = std::move(label);
  s.axis = axis;
  s.mode = mode;
  s.grid = std::move(grid);
  s.params = p;
  s.t_eval = t_eval;
  s.ensemble.n_realizations = realizations;
  return s;
}

// Driven lattice of the resonance figures: J = 2, dF = 0.5, dFomega = 1.21 dF.
LatticeParams driven_params(double omega, double g) {
  return {2.0, 0.5, 1.21 * 0.5, omega, g};
}

constexpr double kDetuning = 0.02;
const double kT200pi = 200.0 * kPi;

ExperimentConfig preset_fig3() {
  ExperimentConfig c;
  const LatticeParams p{1.0, 0.04, 0.0, 0.0, 10.0};
  const double t_final = 1000.0 * p.tunneling_period();
  const auto snaps = linspace(0.0, t_final, 101);
  c.runs.push_back(make_run("coherent", PacketKind::CoherentGaussian, p, t_final, 1, snaps));
  c.runs.push_back(make_run("incoherent", PacketKind::IncoherentGaussian, p, t_final,
                            kDefaultRealizationsSecondMoment));
  return c;
}

ExperimentConfig preset_fig4() {
  ExperimentConfig c;
  for (double g : {0.0, 10.0}) {
    const LatticeParams p{1.0, 0.04, 0.0, 0.0, g};
    const double t_final = 1000.0 * p.tunneling_period();
    c.runs.push_back(make_run(g_label("", g), PacketKind::IncoherentGaussian, p, t_final,
                              kDefaultRealizationsDensity, {0.0, t_final}));
  }
  return c;
}

ExperimentConfig preset_fig6() {
  ExperimentConfig c;
  for (double g : {0.0, 10.0, 20.0, 30.0, 40.0}) {
    const LatticeParams p{1.0, 0.05, 0.0, 0.0, g};
    c.runs.push_back(make_run(g_label("", g), PacketKind::IncoherentGaussian, p,
                              100.0 * p.bloch_period(), kDefaultRealizationsSecondMoment));
  }
  return c;
}

ExperimentConfig preset_fig7() {
  ExperimentConfig c;
  const LatticeParams p = driven_params(0.5 - kDetuning, 0.0);
  const double t_final = 2.0 * kTwoPi / kDetuning;
  const auto snaps = linspace(0.0, t_final, 201);
  c.runs.push_back(make_run("coherent", PacketKind::CoherentGaussian, p, t_final, 1, snaps));
  c.runs.push_back(make_run("incoherent", PacketKind::IncoherentGaussian, p, t_final,
                            kDefaultRealizationsDensity, snaps));
  return c;
}

ExperimentConfig preset_fig9() {
  ExperimentConfig c;
  for (double g : {0.0, 10.0, 20.0, 30.0, 40.0}) {
    const LatticeParams p{1.0, 0.0, 0.0, 0.0, g};
    c.runs.push_back(make_run(g_label("", g), PacketKind::IncoherentGaussian, p, 20.0 * kPi,
                              kDefaultRealizationsDensity, {0.0, 20.0 * kPi}));
  }
  return c;
}

ExperimentConfig preset_fig10c() {
  ExperimentConfig c;
  for (double ratio : {0.0, 1.0, 1.84, 2.5, 3.0, 3.83}) {
    LatticeParams p = driven_params(0.5 - kDetuning, 40.0);
    p.dFomega = ratio * p.dF;
    std::string label = "ratio" + std::to_string(ratio);
    label.erase(label.find_last_not_of('0') + 1);
    if (label.back() == '.') label.pop_back();
    c.runs.push_back(make_run(label, PacketKind::IncoherentGaussian, p, 5.0 * kT200pi,
                              kDefaultRealizationsSecondMoment));
  }
  c.scans.push_back(make_scan("amplitude_g40", ScanAxis::Amplitude, ScanMode::Numeric,
                              {0.5, 1.0, 1.5, 1.84, 2.5, 3.0, 3.5, 3.83, 4.5, 5.33},
                              driven_params(0.5 - kDetuning, 40.0), kT200pi));
  return c;
}

ExperimentConfig preset_fig15() {
  ExperimentConfig c;
  c.scans.push_back(make_scan("frequency", ScanAxis::Frequency, ScanMode::Analytic,
                              linspace(0.05, 0.8, 1501), driven_params(0.5, 0.0), kT200pi));
  return c;
}

ExperimentConfig preset_fig16() {
  ExperimentConfig c;
  for (double periods : {50.0, 100.0, 200.0}) {
    const std::string label = "numeric_t" + std::to_string(static_cast<int>(periods)) + "pi";
    c.scans.push_back(make_scan(label, ScanAxis::Frequency, ScanMode::Numeric,
                                linspace(0.40, 0.60, 21), driven_params(0.5, 40.0),
                                periods * kPi));
  }
  return c;
}

ExperimentConfig preset_fig17() {
  ExperimentConfig c;
  c.scans.push_back(make_scan("analytic", ScanAxis::Frequency, ScanMode::Analytic,
                              linspace(0.40, 0.60, 401), driven_params(0.5, 0.0), kT200pi));
  for (double g : {10.0, 40.0})
    c.scans.push_back(make_scan(g_label("numeric_", g), ScanAxis::Frequency, ScanMode::Numeric,
                                linspace(0.40, 0.60, 21), driven_params(0.5, g), kT200pi));
  return c;
}

ExperimentConfig preset_fig18() {
  ExperimentConfig c;
  for (double g : {0.0, 10.0, 40.0})
    c.runs.push_back(make_run(g_label("coherent_", g), PacketKind::CoherentGaussian,
                              driven_params(0.5, g), kT200pi, 1));
  c.runs.push_back(make_run("incoherent_g0", PacketKind::IncoherentGaussian, driven_params(0.5, 0.0),
                            kT200pi, kDefaultRealizationsSecondMoment));
  c.scans.push_back(make_scan("amplitude_analytic", ScanAxis::Amplitude, ScanMode::Analytic,
                              linspace(0.0, 6.0, 241), driven_params(0.5, 0.0), kT200pi));
  for (double g : {10.0, 40.0})
    c.scans.push_back(make_scan(g_label("amplitude_", g), ScanAxis::Amplitude, ScanMode::Numeric,
                                linspace(0.0, 6.0, 13), driven_params(0.5, g), kT200pi));
  return c;
}

ExperimentConfig preset_figC() {
  ExperimentConfig c;
  for (double g : {0.0, 5.0, 10.0, 20.0, 30.0, 40.0})
    c.runs.push_back(make_run(g_label("", g), PacketKind::IncoherentGaussian, driven_params(0.5, g),
                              2.0 * kT200pi, kDefaultRealizationsSecondMoment));
  return c;
}

struct PresetEntry {
  const char* name;
  ExperimentConfig (*make)();
};

constexpr PresetEntry kPresets[] = {
    {"fig3", preset_fig3},   {"fig4", preset_fig4},   {"fig6", preset_fig6},
    {"fig7", preset_fig7},   {"fig9", preset_fig9},   {"fig10c", preset_fig10c},
    {"fig15", preset_fig15}, {"fig16", preset_fig16}, {"fig17", preset_fig17},
    {"fig18", preset_fig18}, {"figC", preset_figC},
};

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& p : kPresets) v.emplace_back(p.name);
    return v;
  }();
  return names;
}

ExperimentConfig make_preset(std::string_view name) {
  for (const auto& p : kPresets) {
    if (name == p.name) {
      ExperimentConfig c = p.make();
      c.preset = p.name;
      c.seed = kPresetSeed;
      c.apply_seed();
      return c;
    }
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw UnknownPreset("unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  for (const auto& r : cfg.runs)
    result.runs.push_back(
        {r.label, run_ensemble(r.spec, r.params, r.integrator, r.ensemble, r.t_final, r.window)});
  for (const auto& s : cfg.scans) result.scans.push_back({s.label, run_scan(s)});
  return result;
}

}  // namespace tiltlat
