#include "tiltlat/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tiltlat::analytic {

std::vector<double> wannier_stark_state(int m, const LatticeParams& params, SiteRange window) {
  params.validate();
  if (!params.tilted()) throw ZeroTilt();
  const double z = params.J / params.dF;
  const long margin = static_cast<long>(std::ceil(4.0 * z));
  if (!window.contains(static_cast<long>(m) - margin) || !window.contains(static_cast<long>(m) + margin))
    throw WindowTooNarrow("Wannier-Stark state " + std::to_string(m) +
                          " needs the window to cover m +- 4 J/dF");
  const int reach = std::max(m - window.l_min, window.l_max - m);
  const auto j = bessel_j_sequence(std::min(reach, 10000), z);
  std::vector<double> a(window.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int order = window.site(i) - m;
    const int k = std::abs(order);
    if (k >= static_cast<int>(j.size())) continue;
    a[i] = (order < 0 && k % 2 == 1) ? -j[k] : j[k];
  }
  return a;
}

double ws_dipole_element(int m, int m_prime, const LatticeParams& params) {
  if (!params.tilted()) throw ZeroTilt();
  if (m == m_prime) return m;
  if (std::abs(m - m_prime) == 1) return 0.5 * params.J / params.dF;
  return 0.0;
}

double bo_center(double t, const LatticeParams& params) {
  const double L = params.localization_length();
  return L * (1.0 - std::cos(params.bloch_frequency() * t));
}

double breathing_width(double t, double sigma0, const LatticeParams& params) {
  const double L = params.localization_length();
  const double s = std::sin(0.5 * params.bloch_frequency() * t);
  return std::sqrt(sigma0 * sigma0 + 2.0 * L * L * s * s);
}

double ballistic_width(double t, double sigma0, double J, BallisticRegime regime) {
  if (regime == BallisticRegime::SlowCoherent) {
    const double r = J * t / (2.0 * sigma0);
    return std::sqrt(sigma0 * sigma0 + r * r);
  }
  const double r = 0.5 * J * t;
  return std::sqrt(sigma0 * sigma0 + 2.0 * r * r);
}

double ballistic_rate(double sigma0, double J, BallisticRegime regime) {
  return regime == BallisticRegime::SlowCoherent ? J / (2.0 * sigma0) : J / std::sqrt(2.0);
}

int chi_default_terms(double drive_index) {
  const double a = std::abs(drive_index);
  int n = std::max(5, static_cast<int>(std::ceil(a)) + 10);
  if (a == 0.0) return n;
  while (n < 10000 && std::abs(bessel_j(n + 1, a)) > kChiTruncationTolerance) n += 5;
  return n;
}

namespace {

// e^{-i x} sin(x) / dw with x = dw t / 2, written as (t/2) e^{-i x} sinc(x).
// Inside the resonance band the series of the term about dw = 0 is used; it
// equals the limit t/2 at dw = 0 and joins the closed form continuously.
complex resonant_factor(double dw, double t, double eps) {
  const double half_t = 0.5 * t;
  const double x = dw * half_t;
  if (std::abs(x) < 1e-3 || (std::abs(dw) < eps && std::abs(x) < 5e-2)) {
    const double x2 = x * x;
    const double sinc = 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
    const double c = 1.0 - 0.5 * x2 * (1.0 - x2 / 12.0);
    const double s = x * (1.0 - x2 / 6.0 * (1.0 - x2 / 20.0));
    return half_t * sinc * complex(c, -s);
  }
  return half_t * (std::sin(x) / x) * complex(std::cos(x), -std::sin(x));
}

}  // namespace

ChiValue chi(double t, const LatticeParams& params, const ChiOptions& options) {
  params.validate();
  const double a = params.drive_index();
  int n_max = 0;
  if (options.n_max) {
    n_max = *options.n_max;
    if (n_max < 0) throw InvalidParameter("n_max must be non-negative");
    if (a > 0.0 && std::abs(bessel_j(n_max + 1, a)) > kChiTruncationTolerance)
      throw BadTruncation("chi truncated at |n| <= " + std::to_string(n_max) +
                          " drops a Bessel factor above 1e-12 for drive index " +
                          std::to_string(a));
  } else {
    n_max = params.driven() ? chi_default_terms(a) : 0;
  }
  const double wB = params.bloch_frequency();
  const double eps =
      options.eps_resonance.value_or(1e-9 * std::max(wB, params.driven() ? params.omega : 0.0));

  const auto jn = bessel_j_sequence(n_max, a);
  complex sum{};
  for (int n = -n_max; n <= n_max; ++n) {
    // J_n(-a): the Bessel argument carries the sign of the cosine drive term.
    const int k = std::abs(n);
    const double bessel = (n > 0 && k % 2 == 1) ? -jn[k] : jn[k];
    if (bessel == 0.0) continue;
    const double dw = wB - n * params.omega;
    sum += bessel * resonant_factor(dw, t, eps);
  }
  return {params.J * sum};
}

double driven_center(double t, const LatticeParams& params, const ChiOptions& options) {
  const auto c = chi(t, params, options);
  return 2.0 * c.modulus() * std::sin(c.phase());
}

double driven_width(double t, double sigma0, const LatticeParams& params,
                    const ChiOptions& options) {
  const double m = chi(t, params, options).modulus();
  return std::sqrt(sigma0 * sigma0 + 2.0 * m * m);
}

double resonance_peak_slope(int n, const LatticeParams& params) {
  const double omega = params.bloch_frequency() / n;
  const double a = params.dFomega / omega;
  return params.J * std::abs(bessel_j(n, a)) / std::sqrt(2.0);
}

double resonance_envelope(int n, const LatticeParams& params) {
  const double dw = params.bloch_frequency() - n * params.omega;
  return params.J * std::abs(bessel_j(n, params.drive_index())) / std::abs(dw);
}

EffectiveModel effective_model(const LatticeParams& params, EffectiveVariant variant) {
  if (!params.tilted()) throw ZeroTilt();
  const double ratio = params.dFomega / params.dF;
  EffectiveModel m;
  m.variant = variant;
  m.J_eff = variant == EffectiveVariant::RWA ? 0.5 * params.J * ratio
                                               : params.J * bessel_j(1, ratio);
  m.dF_eff = params.detuning();
  if (m.dF_eff != 0.0) m.L_eff = m.J_eff / m.dF_eff;
  return m;
}

}  // namespace tiltlat::analytic
