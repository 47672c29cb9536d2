#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tiltlat/analytic.hpp"
#include "tiltlat/dnlse.hpp"
#include "tiltlat/ensemble.hpp"
#include "tiltlat/experiment.hpp"
#include "tiltlat/io.hpp"
#include "tiltlat/lattice.hpp"

namespace py = pybind11;
using namespace tiltlat;

namespace {

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
  return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::array_t<double> matrix(const std::vector<std::vector<double>>& rows) {
  const auto n = static_cast<py::ssize_t>(rows.size());
  const auto m = static_cast<py::ssize_t>(rows.empty() ? 0 : rows.front().size());
  py::array_t<double> a({n, m});
  auto r = a.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < n; ++i)
    for (py::ssize_t j = 0; j < m; ++j) r(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return a;
}

LatticeState state_from(py::array_t<complex, py::array::c_style | py::array::forcecast> amps,
                        SiteRange window, double time) {
  if (amps.ndim() != 1 || static_cast<std::size_t>(amps.shape(0)) != window.size())
    throw InvalidParameter("amplitude array length must match the window");
  LatticeState s{window, std::vector<complex>(amps.data(), amps.data() + amps.shape(0)), time};
  return s;
}

py::dict trajectory_dict(const Trajectory& t) {
  py::dict d;
  d["times"] = to_array(t.times);
  d["first_moment"] = to_array(t.first_moment);
  d["second_moment"] = to_array(t.second_moment);
  d["norm"] = to_array(t.norm);
  py::list snaps;
  for (const auto& s : t.snapshots) snaps.append(py::make_tuple(s.time, to_array(s.density)));
  d["snapshots"] = snaps;
  d["final_state"] = t.final_state;
  d["dt"] = t.provenance.dt;
  d["steps"] = t.provenance.steps;
  return d;
}

}  // namespace

PYBIND11_MODULE(_tiltlat, m) {
  m.doc() = "Driven tilted optical lattice: DNLSE engine, closed forms and ensembles";
  m.attr("__version__") = std::string(version());

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<WindowTooNarrow>(m, "WindowTooNarrow", base.ptr());
  py::register_exception<ZeroTilt>(m, "ZeroTilt", base.ptr());
  py::register_exception<OutOfRange>(m, "OutOfRange", base.ptr());
  py::register_exception<BadTruncation>(m, "BadTruncation", base.ptr());
  py::register_exception<InvalidParameter>(m, "InvalidParameter", base.ptr());
  py::register_exception<NotNormalized>(m, "NotNormalized", base.ptr());
  py::register_exception<WindowTooShort>(m, "WindowTooShort", base.ptr());
  py::register_exception<GridMismatch>(m, "GridMismatch", base.ptr());
  auto config = py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<UnknownPreset>(m, "UnknownPreset", config.ptr());
  auto guard = py::register_exception<NumericalGuard>(m, "NumericalGuard", base.ptr());
  py::register_exception<EdgeContamination>(m, "EdgeContamination", guard.ptr());
  py::register_exception<StepUnstable>(m, "StepUnstable", guard.ptr());

  // lattice-model
  py::class_<LatticeParams>(m, "LatticeParams")
      .def(py::init([](double J, double dF, double dFomega, double omega, double g) {
             return LatticeParams{J, dF, dFomega, omega, g};
           }),
           py::arg("J") = 1.0, py::arg("dF") = 0.0, py::arg("dFomega") = 0.0,
           py::arg("omega") = 0.0, py::arg("g") = 0.0)
      .def_readwrite("J", &LatticeParams::J)
      .def_readwrite("dF", &LatticeParams::dF)
      .def_readwrite("dFomega", &LatticeParams::dFomega)
      .def_readwrite("omega", &LatticeParams::omega)
      .def_readwrite("g", &LatticeParams::g)
      .def("validate", &LatticeParams::validate)
      .def_property_readonly("bloch_period", &LatticeParams::bloch_period)
      .def_property_readonly("tunneling_period", &LatticeParams::tunneling_period)
      .def_property_readonly("localization_length", &LatticeParams::localization_length)
      .def_property_readonly("detuning", &LatticeParams::detuning)
      .def(py::self == py::self)
      .def("__repr__", [](const LatticeParams& p) {
        return "LatticeParams(J=" + format_double(p.J) + ", dF=" + format_double(p.dF) +
               ", dFomega=" + format_double(p.dFomega) + ", omega=" + format_double(p.omega) +
               ", g=" + format_double(p.g) + ")";
      });

  py::class_<SiteRange>(m, "SiteRange")
      .def(py::init([](int lo, int hi) { return SiteRange{lo, hi}; }), py::arg("l_min"), py::arg("l_max"))
      .def_readwrite("l_min", &SiteRange::l_min)
      .def_readwrite("l_max", &SiteRange::l_max)
      .def_property_readonly("size", &SiteRange::size)
      .def_static("symmetric", &SiteRange::symmetric, py::arg("center"), py::arg("half_width"))
      .def("sites", [](const SiteRange& w) {
        std::vector<int> s(w.size());
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = w.site(i);
        return to_array(s);
      })
      .def(py::self == py::self)
      .def("__repr__", [](const SiteRange& w) {
        return "SiteRange(" + std::to_string(w.l_min) + ", " + std::to_string(w.l_max) + ")";
      });

  py::enum_<PacketKind>(m, "PacketKind")
      .value("CoherentGaussian", PacketKind::CoherentGaussian)
      .value("IncoherentGaussian", PacketKind::IncoherentGaussian);

  py::class_<WavePacketSpec>(m, "WavePacketSpec")
      .def(py::init([](PacketKind kind, double sigma0, int center) {
             return WavePacketSpec{kind, sigma0, center};
           }),
           py::arg("kind") = PacketKind::CoherentGaussian, py::arg("sigma0") = 10.0,
           py::arg("center") = 0)
      .def_readwrite("kind", &WavePacketSpec::kind)
      .def_readwrite("sigma0", &WavePacketSpec::sigma0)
      .def_readwrite("center", &WavePacketSpec::center);

  py::class_<LatticeState>(m, "LatticeState")
      .def(py::init(&state_from), py::arg("amplitudes"), py::arg("window"), py::arg("time") = 0.0)
      .def_readonly("window", &LatticeState::window)
      .def_readonly("time", &LatticeState::time)
      .def_property_readonly("amplitudes", [](const LatticeState& s) { return to_array(s.amplitudes); })
      .def("norm", &LatticeState::norm)
      .def("density", [](const LatticeState& s) { return to_array(s.density()); });

  m.def("make_coherent", &make_coherent, py::arg("spec"), py::arg("window"));
  m.def("make_incoherent_realization", &make_incoherent_realization, py::arg("spec"),
        py::arg("window"), py::arg("seed"));
  m.def("auto_window", &auto_window, py::arg("spec"), py::arg("params"),
        py::arg("t_final") = std::nullopt);
  m.def("realization_seed", &realization_seed, py::arg("master"), py::arg("k"));

  // analytic-oracle
  auto a = m.def_submodule("analytic", "Closed-form g = 0 results");
  a.def("bessel_j", &analytic::bessel_j, py::arg("n"), py::arg("z"));
  a.def("wannier_stark_state",
        [](int mm, const LatticeParams& p, SiteRange w) { return to_array(analytic::wannier_stark_state(mm, p, w)); },
        py::arg("m"), py::arg("params"), py::arg("window"));
  a.def("ws_dipole_element", &analytic::ws_dipole_element, py::arg("m"), py::arg("m_prime"), py::arg("params"));
  a.def("bo_center", py::vectorize([](double t, LatticeParams p) { return analytic::bo_center(t, p); }), py::arg("t"), py::arg("params"));
  a.def("breathing_width", py::vectorize([](double t, double s0, LatticeParams p) { return analytic::breathing_width(t, s0, p); }), py::arg("t"), py::arg("sigma0"),
        py::arg("params"));
  a.def("ballistic_width",
        py::vectorize([](double t, double sigma0, double J, bool coherent) {
          return analytic::ballistic_width(
              t, sigma0, J,
              coherent ? analytic::BallisticRegime::SlowCoherent : analytic::BallisticRegime::FastIncoherent);
        }),
        py::arg("t"), py::arg("sigma0"), py::arg("J"), py::arg("coherent"));
  a.def("chi",
        [](double t, const LatticeParams& p, std::optional<int> n_max, std::optional<double> eps) {
          return analytic::chi(t, p, {n_max, eps}).value;
        },
        py::arg("t"), py::arg("params"), py::arg("n_max") = std::nullopt,
        py::arg("eps_resonance") = std::nullopt);
  a.def("driven_center", py::vectorize([](double t, LatticeParams p) { return analytic::driven_center(t, p); }),
        py::arg("t"), py::arg("params"));
  a.def("driven_width",
        py::vectorize([](double t, double s0, LatticeParams p) { return analytic::driven_width(t, s0, p); }),
        py::arg("t"), py::arg("sigma0"), py::arg("params"));
  a.def("resonance_peak_slope", &analytic::resonance_peak_slope, py::arg("n"), py::arg("params"));
  a.def("resonance_envelope", &analytic::resonance_envelope, py::arg("n"), py::arg("params"));
  a.def("effective_model",
        [](const LatticeParams& p, const std::string& variant) {
          const auto v = variant == "rwa" ? analytic::EffectiveVariant::RWA
                                          : analytic::EffectiveVariant::BesselCorrected;
          if (variant != "rwa" && variant != "bessel")
            throw InvalidParameter("variant must be 'rwa' or 'bessel'");
          const auto e = analytic::effective_model(p, v);
          py::dict d;
          d["J_eff"] = e.J_eff;
          d["dF_eff"] = e.dF_eff;
          d["L_eff"] = e.L_eff ? py::cast(*e.L_eff) : py::none();
          d["variant"] = variant;
          return d;
        },
        py::arg("params"), py::arg("variant") = "bessel");

  // dnlse-engine
  py::class_<IntegratorConfig>(m, "IntegratorConfig")
      .def(py::init([](double dt, std::size_t stride, double guard, std::vector<double> snaps, bool rec) {
             IntegratorConfig c;
             c.dt = dt;
             c.sampling_stride = stride;
             c.edge_guard_threshold = guard;
             c.snapshot_times = std::move(snaps);
             c.record_densities = rec;
             return c;
           }),
           py::arg("dt") = 0.0, py::arg("sampling_stride") = 100, py::arg("edge_guard_threshold") = 1e-8,
           py::arg("snapshot_times") = std::vector<double>{}, py::arg("record_densities") = false)
      .def_readwrite("dt", &IntegratorConfig::dt)
      .def_readwrite("sampling_stride", &IntegratorConfig::sampling_stride)
      .def_readwrite("edge_guard_threshold", &IntegratorConfig::edge_guard_threshold)
      .def_readwrite("snapshot_times", &IntegratorConfig::snapshot_times)
      .def_readwrite("record_densities", &IntegratorConfig::record_densities)
      .def("resolved_dt", &IntegratorConfig::resolved_dt);

  m.def("step", &step, py::arg("state"), py::arg("params"), py::arg("t"), py::arg("dt"));
  m.def("evolve",
        [](const LatticeState& s, const LatticeParams& p, const IntegratorConfig& c, double t_final) {
          Trajectory t;
          {
            py::gil_scoped_release release;
            t = evolve(s, p, c, t_final);
          }
          return trajectory_dict(t);
        },
        py::arg("state"), py::arg("params"), py::arg("config"), py::arg("t_final"));
  m.def("energy", &energy, py::arg("state"), py::arg("params"));
  m.attr("SCHEME") = std::string(kSchemeName);

  // ensemble-observables
  py::class_<EnsembleConfig>(m, "EnsembleConfig")
      .def(py::init([](int n, std::uint64_t seed, bool density, unsigned threads) {
             EnsembleConfig e;
             e.n_realizations = n;
             e.master_seed = seed;
             e.density = density;
             e.threads = threads;
             return e;
           }),
           py::arg("n_realizations") = 10, py::arg("master_seed") = 0, py::arg("density") = false,
           py::arg("threads") = 0)
      .def_readwrite("n_realizations", &EnsembleConfig::n_realizations)
      .def_readwrite("master_seed", &EnsembleConfig::master_seed)
      .def_readwrite("density", &EnsembleConfig::density)
      .def_readwrite("threads", &EnsembleConfig::threads);

  py::class_<ObservableSeries>(m, "ObservableSeries")
      .def_property_readonly("times", [](const ObservableSeries& s) { return to_array(s.times); })
      .def_property_readonly("x", [](const ObservableSeries& s) { return to_array(s.x); })
      .def_property_readonly("sigma", [](const ObservableSeries& s) { return to_array(s.sigma); })
      .def_property_readonly("sigma2", [](const ObservableSeries& s) { return to_array(s.sigma2); })
      .def_property_readonly("stderr_sigma2", [](const ObservableSeries& s) { return to_array(s.stderr_sigma2); })
      .def_property_readonly("realization_m1", [](const ObservableSeries& s) { return matrix(s.realization_m1); })
      .def_property_readonly("realization_m2", [](const ObservableSeries& s) { return matrix(s.realization_m2); })
      .def_property_readonly("snapshots",
                             [](const ObservableSeries& s) {
                               py::list l;
                               for (const auto& x : s.snapshots) l.append(py::make_tuple(x.time, to_array(x.density)));
                               return l;
                             })
      .def_readonly("window", &ObservableSeries::window)
      .def_readonly("params", &ObservableSeries::params)
      .def_readonly("dt", &ObservableSeries::dt)
      .def("__len__", &ObservableSeries::size)
      .def("to_csv", [](const ObservableSeries& s) {
        std::ostringstream os;
        write_series_csv(os, s);
        return os.str();
      });

  m.def("moments",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> p, SiteRange w) {
          const auto r = moments({p.data(), static_cast<std::size_t>(p.size())}, w);
          return py::make_tuple(r.x, r.sigma);
        },
        py::arg("density"), py::arg("window"));
  m.def("run_ensemble",
        [](const WavePacketSpec& spec, const LatticeParams& p, const IntegratorConfig& c,
           const EnsembleConfig& e, double t_final, std::optional<SiteRange> w) {
          py::gil_scoped_release release;
          return run_ensemble(spec, p, c, e, t_final, w);
        },
        py::arg("spec"), py::arg("params"), py::arg("integrator"), py::arg("ensemble"),
        py::arg("t_final"), py::arg("window") = std::nullopt);
  m.def("reduce_moments", &reduce_moments, py::arg("times"), py::arg("m1"), py::arg("m2"));
  m.def("fit_subdiffusion",
        [](const ObservableSeries& s, std::optional<double> lo, std::optional<double> hi, double decades,
           double transient) {
          FitWindowPolicy pol;
          pol.t_lo = lo;
          pol.t_hi = hi;
          pol.decades = decades;
          pol.transient_bloch_periods = transient;
          const auto r = fit_subdiffusion(s, pol);
          py::dict d;
          d["nu"] = r.nu;
          d["t_lo"] = r.t_lo;
          d["t_hi"] = r.t_hi;
          d["r_squared"] = r.r_squared;
          d["points"] = r.points;
          d["nu_stderr"] = r.nu_stderr ? py::cast(*r.nu_stderr) : py::none();
          return d;
        },
        py::arg("series"), py::arg("t_lo") = std::nullopt, py::arg("t_hi") = std::nullopt,
        py::arg("decades") = 1.0, py::arg("transient_bloch_periods") = 10.0);
  m.def("ballistic_rate_fit", &ballistic_rate_fit, py::arg("series"), py::arg("t_lo"));
  m.def("suppression_coefficient",
        [](const ObservableSeries& a, const ObservableSeries& b) { return to_array(suppression_coefficient(a, b)); },
        py::arg("series_g"), py::arg("series_0"));

  // experiment-cli
  m.def("preset_names", &preset_names);
  m.def("preset_config", [](const std::string& name) { return config_to_json(make_preset(name)); },
        py::arg("name"), "JSON config of a preset");
  m.def("run_config",
        [](const std::string& json_text, const std::filesystem::path& out) {
          auto cfg = config_from_json(json_text);
          cfg.resolve();
          ExperimentResult r;
          {
            py::gil_scoped_release release;
            r = run_experiment(cfg);
          }
          std::vector<std::string> files;
          for (const auto& f : write_outputs(out, cfg, r)) files.push_back(f.string());
          return files;
        },
        py::arg("config_json"), py::arg("out_dir"), "Runs a JSON config and writes its outputs");
  m.def("scan",
        [](const std::string& axis, const std::string& mode, std::vector<double> grid, const LatticeParams& p,
           double t_eval, double sigma0, int realizations, std::uint64_t seed) {
          ScanConfig s;
          s.label = "scan";
          s.axis = scan_axis_from_string(axis);
          s.mode = scan_mode_from_string(mode);
          s.grid = std::move(grid);
          s.params = p;
          s.spec.sigma0 = sigma0;
          s.t_eval = t_eval;
          s.ensemble.n_realizations = realizations;
          s.ensemble.master_seed = seed;
          ScanTable t;
          {
            py::gil_scoped_release release;
            t = run_scan(s);
          }
          std::vector<double> v, sg, se;
          for (const auto& pt : t.points) {
            v.push_back(pt.value);
            sg.push_back(pt.sigma);
            se.push_back(pt.stderr_sigma);
          }
          return py::make_tuple(to_array(v), to_array(sg), to_array(se));
        },
        py::arg("axis"), py::arg("mode"), py::arg("grid"), py::arg("params"), py::arg("t_eval"),
        py::arg("sigma0") = 10.0, py::arg("realizations") = 10, py::arg("seed") = 0);
}
