#include "tiltlat/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

namespace tiltlat {

void EnsembleConfig::validate() const {
  if (n_realizations < 1) throw InvalidParameter("n_realizations must be at least 1");
}

Moments moments(std::span<const double> density, SiteRange window) {
  if (density.size() != window.size())
    throw InvalidParameter("density length does not match the window");
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double l = window.site(i);
    s0 += density[i];
    s1 += l * density[i];
    s2 += l * l * density[i];
  }
  if (std::abs(s0 - 1.0) > 1e-6)
    throw NotNormalized("density sums to " + std::to_string(s0) + ", expected 1");
  const double var = s2 - s1 * s1;
  return {s1, std::sqrt(std::max(var, 0.0))};
}

double ObservableSeries::stderr_sigma(std::size_t i) const {
  return sigma[i] > 0.0 ? stderr_sigma2[i] / (2.0 * sigma[i]) : 0.0;
}

ObservableSeries reduce_moments(std::vector<double> times, std::vector<std::vector<double>> m1,
                                std::vector<std::vector<double>> m2) {
  const std::size_t n = m1.size();
  if (n == 0 || m2.size() != n) throw InvalidParameter("need matching, nonempty moment sets");
  const std::size_t samples = times.size();
  for (std::size_t k = 0; k < n; ++k)
    if (m1[k].size() != samples || m2[k].size() != samples)
      throw GridMismatch("realization moment series differ in length");

  ObservableSeries s;
  s.times = std::move(times);
  s.x.resize(samples);
  s.sigma.resize(samples);
  s.sigma2.resize(samples);
  s.stderr_sigma2.resize(samples);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < samples; ++i) {
    double a1 = 0.0;
    double a2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      a1 += m1[k][i];
      a2 += m2[k][i];
    }
    a1 *= inv_n;
    a2 *= inv_n;
    double spread = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = m2[k][i] - a2;
      spread += d * d;
    }
    s.x[i] = a1;
    s.sigma2[i] = std::max(a2 - a1 * a1, 0.0);
    s.sigma[i] = std::sqrt(s.sigma2[i]);
    s.stderr_sigma2[i] =
        n > 1 ? std::sqrt(spread / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n)) : 0.0;
  }
  s.realization_m1 = std::move(m1);
  s.realization_m2 = std::move(m2);
  return s;
}

namespace {

struct RealizationResult {
  Trajectory trajectory;
  std::exception_ptr error;
};

[[noreturn]] void rethrow_tagged(const std::exception_ptr& error, int k) {
  const std::string suffix = " (realization " + std::to_string(k) + ")";
  try {
    std::rethrow_exception(error);
  } catch (const EdgeContamination& e) {
    throw EdgeContamination(e.what() + suffix, k);
  } catch (const StepUnstable& e) {
    throw StepUnstable(e.what() + suffix, k);
  }
}

}  // namespace

ObservableSeries run_ensemble(const WavePacketSpec& spec, const LatticeParams& params,
                              const IntegratorConfig& integrator, const EnsembleConfig& ensemble,
                              double t_final, std::optional<SiteRange> window) {
  ensemble.validate();
  spec.validate();
  params.validate();
  integrator.validate(params);
  const SiteRange win = window.value_or(auto_window(spec, params, t_final));

  const bool coherent = spec.kind == PacketKind::CoherentGaussian;
  // Coherent packets carry no randomness: every realization is the same run.
  const int distinct = coherent ? 1 : ensemble.n_realizations;
  std::vector<RealizationResult> results(static_cast<std::size_t>(distinct));

  auto run_one = [&](int k) {
    auto& slot = results[static_cast<std::size_t>(k)];
    try {
      const std::uint64_t seed = realization_seed(ensemble.master_seed, static_cast<std::uint64_t>(k));
      auto traj = evolve(make_initial_state(spec, win, seed), params, integrator, t_final);
      traj.provenance.seed = seed;
      slot.trajectory = std::move(traj);
    } catch (...) {
      slot.error = std::current_exception();
    }
  };

  unsigned threads = ensemble.threads ? ensemble.threads : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(distinct));
  if (threads == 1) {
    for (int k = 0; k < distinct; ++k) run_one(k);
  } else {
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (int k = next++; k < distinct; k = next++) run_one(k);
      });
  }
  for (int k = 0; k < distinct; ++k)
    if (results[static_cast<std::size_t>(k)].error) rethrow_tagged(results[static_cast<std::size_t>(k)].error, k);

  const auto& first = results.front().trajectory;
  std::vector<std::vector<double>> m1;
  std::vector<std::vector<double>> m2;
  m1.reserve(static_cast<std::size_t>(ensemble.n_realizations));
  m2.reserve(static_cast<std::size_t>(ensemble.n_realizations));
  for (int k = 0; k < ensemble.n_realizations; ++k) {
    const auto& tr = results[static_cast<std::size_t>(coherent ? 0 : k)].trajectory;
    m1.push_back(tr.first_moment);
    m2.push_back(tr.second_moment);
  }
  ObservableSeries series = reduce_moments(first.times, std::move(m1), std::move(m2));

  if (ensemble.density) {
    const double inv_n = 1.0 / static_cast<double>(distinct);
    for (std::size_t j = 0; j < first.snapshots.size(); ++j) {
      AveragedSnapshot avg{first.snapshots[j].time, std::vector<double>(win.size(), 0.0)};
      for (const auto& r : results) {
        const auto& d = r.trajectory.snapshots[j].density;
        for (std::size_t i = 0; i < d.size(); ++i) avg.density[i] += d[i];
      }
      for (auto& p : avg.density) p *= inv_n;
      series.snapshots.push_back(std::move(avg));
    }
  }
  if (!ensemble.second_moment) {
    series.realization_m1.clear();
    series.realization_m2.clear();
  }
  series.window = win;
  series.spec = spec;
  series.params = params;
  series.integrator = integrator;
  series.ensemble = ensemble;
  series.dt = first.provenance.dt;
  return series;
}

namespace {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

}  // namespace

FitResult fit_subdiffusion(const ObservableSeries& series, const FitWindowPolicy& policy) {
  if (series.size() < 2) throw WindowTooShort("series holds fewer than two samples");
  const double t_last = series.times.back();
  const double bloch = series.params.tilted() ? series.params.bloch_period() : 0.0;

  double t_first = 0.0;
  for (double t : series.times)
    if (t > 0.0) {
      t_first = t;
      break;
    }
  if (!(t_first > 0.0)) throw WindowTooShort("series has no positive times");
  const double reference = std::max(t_first, bloch);
  if (t_last < reference * std::pow(10.0, policy.min_series_decades) * (1.0 - 1e-12))
    throw WindowTooShort("series spans less than " + std::to_string(policy.min_series_decades) +
                         " decades past its first Bloch period");

  const double t_hi = policy.t_hi.value_or(t_last);
  const double t_lo = policy.t_lo.value_or(
      std::max(t_hi * std::pow(10.0, -policy.decades), policy.transient_bloch_periods * bloch));
  if (!(t_lo < t_hi)) throw WindowTooShort("empty fit window");

  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double t = series.times[i];
    if (t >= t_lo * (1.0 - 1e-12) && t <= t_hi * (1.0 + 1e-12) && t > 0.0 && series.sigma2[i] > 0.0)
      idx.push_back(i);
  }
  if (idx.size() < 10)
    throw WindowTooShort("fit window [" + std::to_string(t_lo) + ", " + std::to_string(t_hi) +
                         "] holds " + std::to_string(idx.size()) + " samples, need 10");

  std::vector<double> lx(idx.size());
  std::vector<double> ly(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    lx[j] = std::log(series.times[idx[j]]);
    ly[j] = std::log(series.sigma2[idx[j]]);
  }
  const auto fit = least_squares(lx, ly);
  FitResult r{fit.slope, t_lo, t_hi, fit.r_squared, idx.size(), std::nullopt};

  const std::size_t n = series.realization_m1.size();
  if (n >= 2 && series.realization_m2.size() == n) {
    std::vector<double> nus(n);
    for (std::size_t drop = 0; drop < n; ++drop) {
      for (std::size_t j = 0; j < idx.size(); ++j) {
        double a1 = 0.0;
        double a2 = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == drop) continue;
          a1 += series.realization_m1[k][idx[j]];
          a2 += series.realization_m2[k][idx[j]];
        }
        a1 /= static_cast<double>(n - 1);
        a2 /= static_cast<double>(n - 1);
        ly[j] = std::log(std::max(a2 - a1 * a1, 1e-300));
      }
      nus[drop] = least_squares(lx, ly).slope;
    }
    double mean = 0.0;
    for (double v : nus) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : nus) var += (v - mean) * (v - mean);
    r.nu_stderr = std::sqrt(var * static_cast<double>(n - 1) / static_cast<double>(n));
  }
  return r;
}

double ballistic_rate_fit(const ObservableSeries& series, double t_lo) {
  // Normal equations for sigma^2 = a + b u + c u^2 with u = t / t_max.
  const double t_max = series.times.back();
  double s[5] = {0, 0, 0, 0, 0};
  double r[3] = {0, 0, 0};
  std::size_t count = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.times[i] < t_lo) continue;
    const double u = series.times[i] / t_max;
    double p = 1.0;
    for (int k = 0; k < 5; ++k) {
      s[k] += p;
      if (k < 3) r[k] += p * series.sigma2[i];
      p *= u;
    }
    ++count;
  }
  if (count < 10) throw WindowTooShort("ballistic fit needs at least 10 samples");
  // Cramer's rule on the 3x3 Hankel system.
  const double m[3][3] = {{s[0], s[1], s[2]}, {s[1], s[2], s[3]}, {s[2], s[3], s[4]}};
  auto det3 = [](const double a[3][3]) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  double mc[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) mc[i][j] = j == 2 ? r[i] : m[i][j];
  const double c = det3(mc) / det3(m) / (t_max * t_max);
  return std::sqrt(std::max(c, 0.0));
}

std::vector<double> suppression_coefficient(const ObservableSeries& series_g,
                                            const ObservableSeries& series_0) {
  if (series_g.times != series_0.times) throw GridMismatch("series have different time grids");
  if (!(series_g.spec == series_0.spec)) throw GridMismatch("series start from different packets");
  LatticeParams a = series_g.params;
  LatticeParams b = series_0.params;
  a.g = 0.0;
  b.g = 0.0;
  if (!(a == b)) throw GridMismatch("series differ in parameters other than g");
  std::vector<double> c(series_g.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = series_g.sigma[i] / series_0.sigma[i];
  return c;
}

}  // namespace tiltlat
