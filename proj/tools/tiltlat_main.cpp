// tiltlat command-line tool: run, scan, preset, oracle.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical guard tripped,
// 1 anything else (I/O failures and the like).

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tiltlat/analytic.hpp"
#include "tiltlat/experiment.hpp"
#include "tiltlat/io.hpp"

using namespace tiltlat;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitGuard = 3;

struct CommonOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> realizations;
  std::optional<double> t_final;
  std::optional<double> dt;
  std::string config;
  std::string out = "tiltlat_out";

  void add(CLI::App* app, bool with_config = true) {
    app->add_option("--seed", seed, "Master seed of the random initial phases");
    app->add_option("--realizations", realizations, "Realizations per incoherent ensemble");
    app->add_option("--t-final", t_final, "Final time (scan evaluation time for scans)");
    app->add_option("--dt", dt, "Time step");
    app->add_option("--out", out, "Output directory")->capture_default_str();
    if (with_config) app->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
  }

  [[nodiscard]] Overrides overrides() const { return {seed, realizations, t_final, dt}; }
};

struct PhysicsOptions {
  LatticeParams params;
  std::string packet = "incoherent";
  double sigma0 = 10.0;
  int center = 0;

  void add(CLI::App* app) {
    app->add_option("--J", params.J, "Hopping energy")->capture_default_str();
    app->add_option("--dF", params.dF, "Static tilt per site")->capture_default_str();
    app->add_option("--dFomega", params.dFomega, "Drive amplitude per site")->capture_default_str();
    app->add_option("--omega", params.omega, "Drive angular frequency")->capture_default_str();
    app->add_option("--g", params.g, "Interaction constant")->capture_default_str();
    app->add_option("--packet", packet, "coherent or incoherent")->capture_default_str();
    app->add_option("--sigma0", sigma0, "Initial width in sites")->capture_default_str();
    app->add_option("--center", center, "Initial center site")->capture_default_str();
  }

  [[nodiscard]] WavePacketSpec spec() const {
    return {packet_kind_from_string(packet), sigma0, center};
  }
};

int execute(ExperimentConfig cfg, const CommonOptions& common) {
  apply_overrides(cfg, common.overrides());
  cfg.validate();
  cfg.resolve();
  const auto result = run_experiment(cfg);
  const auto files = write_outputs(common.out, cfg, result);
  for (const auto& r : result.runs) {
    const auto& s = r.series;
    std::cout << r.label << ": t = " << format_double(s.times.back())
              << ", x = " << format_double(s.x.back()) << ", sigma = " << format_double(s.sigma.back())
              << '\n';
  }
  for (const auto& s : result.scans)
    std::cout << s.label << ": " << s.table.points.size() << " scan points\n";
  std::cout << "wrote " << files.size() << " files to " << common.out << '\n';
  return 0;
}

std::vector<double> parse_grid(const std::vector<double>& list, const std::vector<double>& range) {
  if (!list.empty()) return list;
  if (range.size() != 3 || range[2] < 2 || range[2] != std::floor(range[2]))
    throw ConfigError("--grid-range expects start,stop,count with count >= 2");
  const int n = static_cast<int>(range[2]);
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = range[0] + (range[1] - range[0]) * i / (n - 1);
  return g;
}

int run_oracle(const std::string& name, const PhysicsOptions& phys, double t_final, int points,
               int order, const std::string& out) {
  if (points < 2) throw ConfigError("--points must be at least 2");
  if (!(t_final > 0.0)) throw ConfigError("--t-final must be positive");
  const auto& p = phys.params;
  std::ostringstream csv;

  if (name == "effective_model") {
    for (auto variant : {analytic::EffectiveVariant::RWA, analytic::EffectiveVariant::BesselCorrected}) {
      const auto m = analytic::effective_model(p, variant);
      csv << (variant == analytic::EffectiveVariant::RWA ? "rwa" : "bessel") << ",J_eff="
          << format_double(m.J_eff) << ",dF_eff=" << format_double(m.dF_eff)
          << ",L_eff=" << (m.L_eff ? format_double(*m.L_eff) : std::string("inf")) << '\n';
    }
  } else if (name == "bessel") {
    csv << "z,J\n";
    for (int i = 0; i < points; ++i) {
      const double z = t_final * i / (points - 1);
      csv << format_double(z) << ',' << format_double(analytic::bessel_j(order, z)) << '\n';
    }
  } else if (name == "wannier_stark") {
    const double z = p.localization_length();
    const int half = static_cast<int>(std::ceil(4.0 * z)) + 20;
    const SiteRange w = SiteRange::symmetric(order, half);
    const auto a = analytic::wannier_stark_state(order, p, w);
    csv << "l,a\n";
    for (std::size_t i = 0; i < a.size(); ++i) csv << w.site(i) << ',' << format_double(a[i]) << '\n';
  } else {
    std::function<std::string(double)> row;
    std::string header;
    const double s0 = phys.sigma0;
    if (name == "bo_center") {
      header = "t,x";
      row = [&](double t) { return format_double(analytic::bo_center(t, p)); };
    } else if (name == "breathing_width") {
      header = "t,sigma";
      row = [&](double t) { return format_double(analytic::breathing_width(t, s0, p)); };
    } else if (name == "ballistic_coherent" || name == "ballistic_incoherent") {
      header = "t,sigma";
      const auto regime = name == "ballistic_coherent" ? analytic::BallisticRegime::SlowCoherent
                                                       : analytic::BallisticRegime::FastIncoherent;
      row = [&, regime](double t) { return format_double(analytic::ballistic_width(t, s0, p.J, regime)); };
    } else if (name == "chi") {
      header = "t,re,im,modulus,phase";
      row = [&](double t) {
        const auto c = analytic::chi(t, p);
        return format_double(c.value.real()) + ',' + format_double(c.value.imag()) + ',' +
               format_double(c.modulus()) + ',' + format_double(c.phase());
      };
    } else if (name == "driven_center") {
      header = "t,x";
      row = [&](double t) { return format_double(analytic::driven_center(t, p)); };
    } else if (name == "driven_width") {
      header = "t,sigma";
      row = [&](double t) { return format_double(analytic::driven_width(t, s0, p)); };
    } else {
      throw ConfigError("unknown oracle '" + name + "'");
    }
    csv << header << '\n';
    for (int i = 0; i < points; ++i) {
      const double t = t_final * i / (points - 1);
      csv << format_double(t) << ',' << row(t) << '\n';
    }
  }

  if (out.empty() || out == "-") {
    std::cout << csv.str();
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw Error("cannot write " + out);
    f << csv.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven tilted optical lattice simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  // run
  auto* run = app.add_subcommand("run", "Run one ensemble, or every entry of a config file");
  CommonOptions run_common;
  PhysicsOptions run_phys;
  std::vector<double> snapshots;
  std::string run_label = "run";
  run_common.add(run);
  run_phys.add(run);
  run->add_option("--snapshots", snapshots, "Times at which averaged densities are written")->delimiter(',');
  run->add_option("--label", run_label, "Run label (output subdirectory)")->capture_default_str();

  // scan
  auto* scan = app.add_subcommand("scan", "Width at a fixed time against drive frequency or amplitude");
  CommonOptions scan_common;
  PhysicsOptions scan_phys;
  std::string axis = "frequency";
  std::string mode = "analytic";
  std::vector<double> grid;
  std::vector<double> grid_range;
  std::string scan_label = "scan";
  scan_common.add(scan);
  scan_phys.add(scan);
  scan->add_option("--axis", axis, "frequency (omega) or amplitude (dFomega/dF)")->capture_default_str();
  scan->add_option("--mode", mode, "analytic or numeric")->capture_default_str();
  scan->add_option("--grid", grid, "Grid values")->delimiter(',');
  scan->add_option("--grid-range", grid_range, "start stop count")->expected(3)->delimiter(',');
  scan->add_option("--label", scan_label, "Scan label (output subdirectory)")->capture_default_str();

  // preset
  auto* preset = app.add_subcommand("preset", "Reproduce a figure scenario");
  CommonOptions preset_common;
  std::string preset_name;
  bool list_presets = false;
  preset_common.add(preset, false);
  preset->add_option("name", preset_name, "Preset name");
  preset->add_flag("--list", list_presets, "List preset names");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Evaluate a closed form on a uniform grid");
  PhysicsOptions oracle_phys;
  std::string oracle_name;
  double oracle_t = 100.0;
  int oracle_points = 101;
  int oracle_order = 0;
  std::string oracle_out = "-";
  oracle->add_option("name", oracle_name,
                     "bo_center, breathing_width, ballistic_coherent, ballistic_incoherent, chi, "
                     "driven_center, driven_width, bessel, wannier_stark, effective_model")
      ->required();
  oracle_phys.add(oracle);
  oracle->add_option("--t-final", oracle_t, "Upper end of the grid (z for bessel)")->capture_default_str();
  oracle->add_option("--points", oracle_points, "Grid points")->capture_default_str();
  oracle->add_option("--order", oracle_order, "Bessel order or Wannier–Stark index")->capture_default_str();
  oracle->add_option("--out", oracle_out, "Output CSV file, - for stdout")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      if (!run_common.config.empty()) return execute(load_config(run_common.config), run_common);
      ExperimentConfig cfg;
      RunConfig r;
      r.label = run_label;
      r.spec = run_phys.spec();
      r.params = run_phys.params;
      r.t_final = run_common.t_final.value_or(100.0 * r.params.tunneling_period());
      r.ensemble.n_realizations = r.spec.kind == PacketKind::CoherentGaussian ? 1 : kDefaultRealizationsSecondMoment;
      r.ensemble.density = !snapshots.empty();
      r.integrator.snapshot_times = snapshots;
      cfg.seed = run_common.seed.value_or(0);
      cfg.runs.push_back(std::move(r));
      return execute(std::move(cfg), run_common);
    }
    if (*scan) {
      if (!scan_common.config.empty()) {
        auto cfg = load_config(scan_common.config);
        if (cfg.scans.empty()) throw ConfigError("config defines no scans");
        cfg.runs.clear();
        return execute(std::move(cfg), scan_common);
      }
      ExperimentConfig cfg;
      ScanConfig s;
      s.label = scan_label;
      s.axis = scan_axis_from_string(axis);
      s.mode = scan_mode_from_string(mode);
      s.grid = parse_grid(grid, grid_range);
      s.params = scan_phys.params;
      s.spec = scan_phys.spec();
      s.t_eval = scan_common.t_final.value_or(200.0 * kPi);
      cfg.seed = scan_common.seed.value_or(0);
      cfg.scans.push_back(std::move(s));
      return execute(std::move(cfg), scan_common);
    }
    if (*preset) {
      if (list_presets) {
        for (const auto& n : preset_names()) std::cout << n << '\n';
        return 0;
      }
      if (preset_name.empty()) throw ConfigError("preset name required (see --list)");
      return execute(make_preset(preset_name), preset_common);
    }
    if (*oracle)
      return run_oracle(oracle_name, oracle_phys, oracle_t, oracle_points, oracle_order, oracle_out);
  } catch (const NumericalGuard& e) {
    std::cerr << "numerical guard: " << e.what() << '\n';
    return kExitGuard;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidParameter& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ZeroTilt& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const WindowTooNarrow& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BadTruncation& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
