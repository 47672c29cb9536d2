#include "tiltlat/io.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace tiltlat {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_series_csv(std::ostream& out, const ObservableSeries& series) {
  out << kSeriesHeader << '\n';
  const double tj = series.params.tunneling_period();
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double t = series.times[i];
    out << format_double(t) << ',' << format_double(t / tj) << ',' << format_double(series.x[i])
        << ',' << format_double(series.sigma[i]) << ',' << format_double(series.sigma2[i]) << ','
        << format_double(series.stderr_sigma2[i]) << '\n';
  }
}

void write_density_csv(std::ostream& out, SiteRange window, const std::vector<double>& density) {
  out << kDensityHeader << '\n';
  for (std::size_t i = 0; i < density.size(); ++i)
    out << window.site(i) << ',' << format_double(density[i]) << '\n';
}

std::string density_filename(double time) { return "density_t" + format_double(time) + ".csv"; }

void write_scan_csv(std::ostream& out, const ScanTable& table) {
  out << (table.axis == ScanAxis::Frequency ? "omega" : "Fomega_over_F") << ",sigma,stderr_sigma\n";
  for (const auto& p : table.points)
    out << format_double(p.value) << ',' << format_double(p.sigma) << ','
        << format_double(p.stderr_sigma) << '\n';
}

// ---------------------------------------------------------------------------
// JSON.

namespace {

json to_json(const WavePacketSpec& s) {
  return {{"kind", std::string(to_string(s.kind))}, {"sigma0", s.sigma0}, {"center", s.center}};
}

json to_json(const LatticeParams& p) {
  return {{"J", p.J}, {"dF", p.dF}, {"dFomega", p.dFomega}, {"omega", p.omega}, {"g", p.g}};
}

json to_json(const IntegratorConfig& c) {
  return {{"dt", c.dt},
          {"sampling_stride", c.sampling_stride},
          {"edge_guard_threshold", c.edge_guard_threshold},
          {"snapshot_times", c.snapshot_times},
          {"record_densities", c.record_densities}};
}

json to_json(const EnsembleConfig& e) {
  return {{"n_realizations", e.n_realizations},
          {"second_moment", e.second_moment},
          {"density", e.density},
          {"threads", e.threads}};
}

// Object reader that rejects keys nobody asked for.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    return convert<T>(j_.at(key), key);
  }

  template <class T>
  T require(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(where(key) + ": missing required key");
    return convert<T>(j_.at(key), key);
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  [[nodiscard]] std::string where(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError(where(key) + ": unknown key");
  }

 private:
  template <class T>
  T convert(const json& v, const std::string& key) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where(key) + ": expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
      if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)
        throw ConfigError(where(key) + ": expected a non-negative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    } else {
      if (!v.is_array()) throw ConfigError(where(key) + ": expected an array");
      for (const auto& e : v)
        if (!e.is_number()) throw ConfigError(where(key) + ": expected an array of numbers");
    }
    return v.get<T>();
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
auto wrap(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

WavePacketSpec spec_from(const json* j, const std::string& path, WavePacketSpec s) {
  if (!j) return s;
  Reader r(*j, path);
  const auto kind = r.get<std::string>("kind", std::string(to_string(s.kind)));
  s.kind = wrap(r.where("kind"), [&] { return packet_kind_from_string(kind); });
  s.sigma0 = r.get("sigma0", s.sigma0);
  s.center = r.get("center", s.center);
  r.finish();
  return s;
}

LatticeParams params_from(const json* j, const std::string& path) {
  if (!j) throw ConfigError(path + ": missing required key");
  Reader r(*j, path);
  LatticeParams p;
  p.J = r.get("J", p.J);
  p.dF = r.get("dF", p.dF);
  p.dFomega = r.get("dFomega", p.dFomega);
  p.omega = r.get("omega", p.omega);
  p.g = r.get("g", p.g);
  r.finish();
  return p;
}

IntegratorConfig integrator_from(const json* j, const std::string& path) {
  IntegratorConfig c;
  if (!j) return c;
  Reader r(*j, path);
  c.dt = r.get("dt", c.dt);
  c.sampling_stride = r.get("sampling_stride", c.sampling_stride);
  c.edge_guard_threshold = r.get("edge_guard_threshold", c.edge_guard_threshold);
  c.snapshot_times = r.get("snapshot_times", c.snapshot_times);
  c.record_densities = r.get("record_densities", c.record_densities);
  r.finish();
  return c;
}

EnsembleConfig ensemble_from(const json* j, const std::string& path) {
  EnsembleConfig e;
  if (!j) return e;
  Reader r(*j, path);
  e.n_realizations = r.get("n_realizations", e.n_realizations);
  e.second_moment = r.get("second_moment", e.second_moment);
  e.density = r.get("density", e.density);
  e.threads = r.get("threads", e.threads);
  r.finish();
  return e;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["code_version"] = std::string(version());
  j["scheme"] = std::string(kSchemeName);
  j["preset"] = cfg.preset;
  j["seed"] = cfg.seed;
  j["runs"] = json::array();
  for (const auto& r : cfg.runs) {
    json jr{{"label", r.label},
            {"packet", to_json(r.spec)},
            {"lattice", to_json(r.params)},
            {"integrator", to_json(r.integrator)},
            {"ensemble", to_json(r.ensemble)},
            {"t_final", r.t_final}};
    if (r.window) jr["window"] = {r.window->l_min, r.window->l_max};
    j["runs"].push_back(std::move(jr));
  }
  j["scans"] = json::array();
  for (const auto& s : cfg.scans) {
    j["scans"].push_back({{"label", s.label},
                          {"axis", std::string(to_string(s.axis))},
                          {"mode", std::string(to_string(s.mode))},
                          {"grid", s.grid},
                          {"lattice", to_json(s.params)},
                          {"packet", to_json(s.spec)},
                          {"t_eval", s.t_eval},
                          {"integrator", to_json(s.integrator)},
                          {"ensemble", to_json(s.ensemble)}});
  }
  return j.dump(2) + "\n";
}

ExperimentConfig config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  Reader top(j, "");
  ExperimentConfig cfg;
  // Informational keys written by config_to_json.
  top.get<std::string>("code_version", "");
  top.get<std::string>("scheme", "");
  cfg.preset = top.get<std::string>("preset", "");
  cfg.seed = top.get<std::uint64_t>("seed", 0);

  if (const json* runs = top.child("runs")) {
    if (!runs->is_array()) throw ConfigError("runs: expected an array");
    for (std::size_t i = 0; i < runs->size(); ++i) {
      const std::string path = "runs[" + std::to_string(i) + "]";
      Reader r((*runs)[i], path);
      RunConfig rc;
      rc.label = r.require<std::string>("label");
      rc.spec = spec_from(r.child("packet"), r.where("packet"), rc.spec);
      rc.params = params_from(r.child("lattice"), r.where("lattice"));
      rc.integrator = integrator_from(r.child("integrator"), r.where("integrator"));
      rc.ensemble = ensemble_from(r.child("ensemble"), r.where("ensemble"));
      rc.t_final = r.require<double>("t_final");
      if (const json* w = r.child("window"); w && !w->is_null()) {
        if (!w->is_array() || w->size() != 2 || !(*w)[0].is_number_integer() ||
            !(*w)[1].is_number_integer())
          throw ConfigError(r.where("window") + ": expected [l_min, l_max]");
        rc.window = SiteRange{(*w)[0].get<int>(), (*w)[1].get<int>()};
      }
      r.finish();
      cfg.runs.push_back(std::move(rc));
    }
  }
  if (const json* scans = top.child("scans")) {
    if (!scans->is_array()) throw ConfigError("scans: expected an array");
    for (std::size_t i = 0; i < scans->size(); ++i) {
      const std::string path = "scans[" + std::to_string(i) + "]";
      Reader r((*scans)[i], path);
      ScanConfig sc;
      sc.label = r.require<std::string>("label");
      const auto axis = r.require<std::string>("axis");
      sc.axis = scan_axis_from_string(axis);
      sc.mode = scan_mode_from_string(r.get<std::string>("mode", "analytic"));
      sc.grid = r.require<std::vector<double>>("grid");
      sc.params = params_from(r.child("lattice"), r.where("lattice"));
      sc.spec = spec_from(r.child("packet"), r.where("packet"), sc.spec);
      sc.t_eval = r.require<double>("t_eval");
      sc.integrator = integrator_from(r.child("integrator"), r.where("integrator"));
      sc.ensemble = ensemble_from(r.child("ensemble"), r.where("ensemble"));
      r.finish();
      cfg.scans.push_back(std::move(sc));
    }
  }
  top.finish();
  cfg.apply_seed();
  try {
    cfg.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text,
                std::vector<std::filesystem::path>& written) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
  written.push_back(path);
}

}  // namespace

std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& dir,
                                                 const ExperimentConfig& cfg,
                                                 const ExperimentResult& result) {
  std::vector<std::filesystem::path> written;
  std::filesystem::create_directories(dir);
  write_file(dir / "config.json", config_to_json(cfg), written);
  for (const auto& run : result.runs) {
    const auto sub = dir / run.label;
    std::filesystem::create_directories(sub);
    std::ostringstream csv;
    write_series_csv(csv, run.series);
    write_file(sub / "series.csv", csv.str(), written);
    for (const auto& snap : run.series.snapshots) {
      std::ostringstream d;
      write_density_csv(d, run.series.window, snap.density);
      write_file(sub / density_filename(snap.time), d.str(), written);
    }
  }
  for (const auto& scan : result.scans) {
    const auto sub = dir / scan.label;
    std::filesystem::create_directories(sub);
    std::ostringstream csv;
    write_scan_csv(csv, scan.table);
    write_file(sub / "scan.csv", csv.str(), written);
  }
  return written;
}

}  // namespace tiltlat
