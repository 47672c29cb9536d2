#include "tiltlat/dnlse.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

namespace tiltlat {

namespace {

// FFTW planning and plan destruction are not thread-safe; execution is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr double kStepDriftLimit = 1e-6;

}  // namespace

double IntegratorConfig::resolved_dt(const LatticeParams& params) const {
  if (dt > 0.0) return dt;
  double h = params.tunneling_period() / 200.0;
  if (params.driven()) h = std::min(h, kTwoPi / params.omega / 100.0);
  return h;
}

void IntegratorConfig::validate(const LatticeParams& params) const {
  const double h = resolved_dt(params);
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidParameter("time step must be positive");
  if (params.J > 0.0 && h > params.tunneling_period() / 100.0 * (1.0 + 1e-12))
    throw InvalidParameter("time step exceeds T_J / 100");
  if (params.driven() && h > kTwoPi / params.omega / 100.0 * (1.0 + 1e-12))
    throw InvalidParameter("time step exceeds a hundredth of the drive period");
  if (sampling_stride == 0) throw InvalidParameter("sampling_stride must be at least 1");
  if (!(edge_guard_threshold > 0.0)) throw InvalidParameter("edge_guard_threshold must be positive");
}

namespace {

// exp(i a); Taylor polynomials through a^18 / a^19 for |a| <= 1 (truncation
// error below 1e-17), libm otherwise.
constexpr double inv_factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return 1.0 / f;
}

inline complex expi(double a) noexcept {
  if (std::abs(a) > 1.0) return {std::cos(a), std::sin(a)};
  constexpr double c2 = -inv_factorial(2), c4 = inv_factorial(4), c6 = -inv_factorial(6),
                   c8 = inv_factorial(8), c10 = -inv_factorial(10), c12 = inv_factorial(12),
                   c14 = -inv_factorial(14), c16 = inv_factorial(16), c18 = -inv_factorial(18);
  constexpr double s3 = -inv_factorial(3), s5 = inv_factorial(5), s7 = -inv_factorial(7),
                   s9 = inv_factorial(9), s11 = -inv_factorial(11), s13 = inv_factorial(13),
                   s15 = -inv_factorial(15), s17 = inv_factorial(17), s19 = -inv_factorial(19);
  const double x = a * a;
  const double c =
      1.0 + x * (c2 + x * (c4 + x * (c6 + x * (c8 + x * (c10 + x * (c12 + x * (c14 + x * (c16 + x * c18))))))));
  const double s =
      a * (1.0 + x * (s3 + x * (s5 + x * (s7 + x * (s9 + x * (s11 + x * (s13 + x * (s15 + x * (s17 + x * s19)))))))));
  return {c, s};
}

// Plain complex product; std::complex's operator* takes the slow Annex G path.
inline complex mul(complex a, complex b) noexcept {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

constexpr std::size_t kPhaseBlock = 32;

}  // namespace

struct SplitStepPropagator::Impl {
  SiteRange window;
  LatticeParams params;
  double dt = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;                // FFT length of the odd extension, 2 (n + 1)
  complex* state = nullptr;         // n amplitudes
  complex* work = nullptr;          // m-point odd extension
  fftw_plan plan = nullptr;
  std::vector<complex> hop_factor;  // sine-mode phases with transform scaling folded in
  std::vector<complex> fine;        // e^{-i r phi}, r < kPhaseBlock
  std::vector<complex> coarse;      // e^{-i (l_min + kPhaseBlock q) phi}

  Impl(SiteRange w, const LatticeParams& p, double h)
      : window(w), params(p), dt(h), n(w.size()), m(2 * (w.size() + 1)) {
    if (n < 2) throw WindowTooNarrow("the integrator needs at least two sites");
    hop_factor.resize(n);
    fine.resize(kPhaseBlock);
    coarse.resize(n / kPhaseBlock + 1);
    // Mode k (1-based) of the open chain has energy -J cos(pi k / (n+1)). The
    // odd-extension FFT yields -2i times the sine transform, and the inverse
    // sine transform carries 2 / (n+1); together a factor -1 / (2 (n+1)).
    const double scale = -1.0 / (2.0 * static_cast<double>(n + 1));
    for (std::size_t k = 1; k <= n; ++k) {
      const double e = -p.J * std::cos(kPi * static_cast<double>(k) / static_cast<double>(n + 1));
      hop_factor[k - 1] = std::polar(1.0, -e * dt) * scale;
    }
    std::lock_guard lock(fftw_planner_mutex());
    state = static_cast<complex*>(fftw_malloc(sizeof(complex) * n));
    work = static_cast<complex*>(fftw_malloc(sizeof(complex) * m));
    std::fill(state, state + n, complex{});
    std::fill(work, work + m, complex{});
    auto* z = reinterpret_cast<fftw_complex*>(work);
    plan = fftw_plan_dft_1d(static_cast<int>(m), z, z, FFTW_FORWARD, FFTW_ESTIMATE);
  }

  ~Impl() {
    std::lock_guard lock(fftw_planner_mutex());
    if (plan) fftw_destroy_plan(plan);
    if (work) fftw_free(work);
    if (state) fftw_free(state);
  }

  complex* data() noexcept { return state; }

  void local(double t0, double t1) noexcept {
    const double tau = t1 - t0;
    double phi = params.dF * tau;
    if (params.driven())
      phi += params.dFomega / params.omega * (std::sin(params.omega * t1) - std::sin(params.omega * t0));
    // e^{-i l phi} = coarse[q] * fine[r] for l = l_min + kPhaseBlock q + r.
    for (std::size_t r = 0; r < kPhaseBlock; ++r)
      fine[r] = expi(-static_cast<double>(r) * phi);
    for (std::size_t q = 0; q < coarse.size(); ++q) {
      const double a = -(static_cast<double>(window.l_min) + static_cast<double>(kPhaseBlock * q)) * phi;
      coarse[q] = {std::cos(a), std::sin(a)};
    }
    const double gt = params.g * tau;
    complex* c = state;
    if (gt == 0.0) {
      for (std::size_t i = 0; i < n; ++i)
        c[i] = mul(c[i], mul(coarse[i / kPhaseBlock], fine[i % kPhaseBlock]));
    } else {
      for (std::size_t i = 0; i < n; ++i)
        c[i] = mul(c[i], mul(mul(coarse[i / kPhaseBlock], fine[i % kPhaseBlock]),
                            expi(-gt * std::norm(c[i]))));
    }
  }

  // Odd extension y = [0, c, 0, -reverse(c)]; its FFT is -2i times the type-I
  // sine transform of c.
  void odd_extend() noexcept {
    work[0] = 0.0;
    work[n + 1] = 0.0;
    for (std::size_t j = 1; j <= n; ++j) work[m - j] = -work[j];
  }

  void hop() noexcept {
    std::copy(state, state + n, work + 1);
    odd_extend();
    fftw_execute(plan);
    for (std::size_t k = 1; k <= n; ++k) work[k] = mul(work[k], hop_factor[k - 1]);
    odd_extend();
    fftw_execute(plan);
    std::copy(work + 1, work + 1 + n, state);
  }
};

SplitStepPropagator::SplitStepPropagator(SiteRange window, const LatticeParams& params, double dt)
    : impl_(std::make_unique<Impl>(window, params, dt)) {}
SplitStepPropagator::~SplitStepPropagator() = default;
SplitStepPropagator::SplitStepPropagator(SplitStepPropagator&&) noexcept = default;
SplitStepPropagator& SplitStepPropagator::operator=(SplitStepPropagator&&) noexcept = default;

SiteRange SplitStepPropagator::window() const noexcept { return impl_->window; }
double SplitStepPropagator::dt() const noexcept { return impl_->dt; }

std::span<complex> SplitStepPropagator::amplitudes() noexcept { return {impl_->data(), impl_->n}; }
std::span<const complex> SplitStepPropagator::amplitudes() const noexcept {
  return {impl_->data(), impl_->n};
}

void SplitStepPropagator::load(std::span<const complex> c) {
  if (c.size() != impl_->n) throw InvalidParameter("amplitude count does not match the window");
  std::copy(c.begin(), c.end(), impl_->data());
}

void SplitStepPropagator::local(double t0, double t1) noexcept { impl_->local(t0, t1); }
void SplitStepPropagator::hop() noexcept { impl_->hop(); }

void SplitStepPropagator::step(double t) noexcept {
  const double mid = t + 0.5 * impl_->dt;
  impl_->local(t, mid);
  impl_->hop();
  impl_->local(mid, t + impl_->dt);
}

LatticeState step(const LatticeState& state, const LatticeParams& params, double t, double dt) {
  SplitStepPropagator prop(state.window, params, dt);
  prop.load(state.amplitudes);
  prop.step(t);
  auto c = prop.amplitudes();
  return {state.window, {c.begin(), c.end()}, t + dt};
}

double edge_mass(std::span<const complex> amplitudes) {
  const std::size_t n = amplitudes.size();
  const std::size_t edge = std::max<std::size_t>(1, (n + 99) / 100);
  double left = 0.0;
  double right = 0.0;
  for (std::size_t i = 0; i < edge && i < n; ++i) {
    left += std::norm(amplitudes[i]);
    right += std::norm(amplitudes[n - 1 - i]);
  }
  return std::max(left, right);
}

double energy(const LatticeState& state, const LatticeParams& params) {
  const auto& c = state.amplitudes;
  double e = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double p = std::norm(c[i]);
    e += params.dF * state.window.site(i) * p + 0.5 * params.g * p * p;
    if (i + 1 < c.size()) e -= params.J * std::real(std::conj(c[i + 1]) * c[i]);
  }
  return e;
}

namespace {

struct Schedule {
  std::vector<std::size_t> steps;  // sorted, unique
  std::vector<bool> snapshot;
};

Schedule make_schedule(std::size_t n_steps, std::size_t stride, const std::vector<double>& snaps,
                       double t0, double dt) {
  std::vector<std::pair<std::size_t, bool>> marks;
  for (std::size_t k = 0; k <= n_steps; k += stride) marks.emplace_back(k, false);
  marks.emplace_back(n_steps, false);
  for (double ts : snaps) {
    const double k = std::round((ts - t0) / dt);
    if (k < 0.0 || k > static_cast<double>(n_steps)) continue;
    marks.emplace_back(static_cast<std::size_t>(k), true);
  }
  std::sort(marks.begin(), marks.end());
  Schedule s;
  for (const auto& [k, snap] : marks) {
    if (!s.steps.empty() && s.steps.back() == k) {
      if (snap) s.snapshot.back() = true;
      continue;
    }
    s.steps.push_back(k);
    s.snapshot.push_back(snap);
  }
  return s;
}

}  // namespace

Trajectory evolve(LatticeState state, const LatticeParams& params, const IntegratorConfig& config,
                  double t_final, const Observer& observer) {
  if (!(params.J >= 0.0)) throw InvalidParameter("J must be non-negative");
  if (params.driven() && !(params.omega > 0.0))
    throw InvalidParameter("omega must be positive when the drive is on");
  if (params.J > 0.0) config.validate(params);
  const double t0 = state.time;
  if (!(t_final >= t0)) throw InvalidParameter("t_final precedes the state's time");

  const double requested = config.resolved_dt(params);
  const std::size_t n_steps =
      t_final == t0 ? 0
                    : static_cast<std::size_t>(std::ceil((t_final - t0) / requested - 1e-9));
  const double dt = n_steps == 0 ? requested : (t_final - t0) / static_cast<double>(n_steps);
  const Schedule schedule = make_schedule(n_steps, config.sampling_stride, config.snapshot_times, t0, dt);

  Trajectory traj;
  traj.provenance = {params, config, state.window, dt, n_steps, 0};
  const std::size_t n_samples = schedule.steps.size();
  traj.times.reserve(n_samples);
  traj.first_moment.reserve(n_samples);
  traj.second_moment.reserve(n_samples);
  traj.norm.reserve(n_samples);

  SplitStepPropagator prop(state.window, params, dt);
  prop.load(state.amplitudes);
  const double l0 = state.window.l_min;

  double last_norm = state.norm();
  std::size_t last_step = 0;
  std::size_t next = 0;

  const double span = t_final - t0;
  auto time_at = [&](std::size_t k) {
    return k == n_steps ? t_final : t0 + span * static_cast<double>(k) / static_cast<double>(n_steps);
  };

  auto record = [&](std::size_t k) {
    auto c = prop.amplitudes();
    double s0 = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double p = std::norm(c[i]);
      const double l = l0 + static_cast<double>(i);
      s0 += p;
      s1 += l * p;
      s2 += l * l * p;
    }
    const double t = time_at(k);
    if (!std::isfinite(s0))
      throw StepUnstable("non-finite amplitudes at t = " + std::to_string(t));
    if (k > last_step &&
        std::abs(s0 - last_norm) / static_cast<double>(k - last_step) > kStepDriftLimit)
      throw StepUnstable("norm drift per step above 1e-6 at t = " + std::to_string(t));
    last_norm = s0;
    last_step = k;

    traj.times.push_back(t);
    traj.norm.push_back(s0);
    traj.first_moment.push_back(s1 / s0);
    traj.second_moment.push_back(s2 / s0);
    const bool snap = schedule.snapshot[next];
    if (snap || config.record_densities) {
      DensitySnapshot ds{t, std::vector<double>(c.size())};
      for (std::size_t i = 0; i < c.size(); ++i) ds.density[i] = std::norm(c[i]);
      traj.snapshots.push_back(std::move(ds));
    }
    if (observer) {
      LatticeState view{state.window, {c.begin(), c.end()}, t};
      observer(view, SampleInfo{next, k, snap});
    }
    ++next;
  };

  auto check_edges = [&](std::size_t k) {
    const double m = edge_mass(prop.amplitudes());
    if (m > config.edge_guard_threshold) {
      std::ostringstream os;
      os << "edge mass " << m << " exceeds " << config.edge_guard_threshold << " at t = "
         << time_at(k) << " on window [" << state.window.l_min << ", "
         << state.window.l_max << "]; enlarge the window";
      throw EdgeContamination(os.str());
    }
  };

  check_edges(0);
  record(0);
  bool half_applied = false;
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double t = time_at(k);
    const double t_next = time_at(k + 1);
    const double mid = 0.5 * (t + t_next);
    if (!half_applied) prop.local(t, mid);
    prop.hop();
    check_edges(k + 1);
    // Consecutive local factors commute (they leave |c_l| unchanged), so the
    // trailing half step is merged with the next leading one between samples.
    const bool sample_next = next < n_samples && schedule.steps[next] == k + 1;
    if (sample_next) {
      prop.local(mid, t_next);
      half_applied = false;
      record(k + 1);
    } else {
      prop.local(mid, 0.5 * (t_next + time_at(k + 2)));
      half_applied = true;
    }
  }

  auto c = prop.amplitudes();
  traj.final_state = {state.window, {c.begin(), c.end()}, t_final};
  return traj;
}

}  // namespace tiltlat
