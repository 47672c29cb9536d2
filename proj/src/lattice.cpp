#include "tiltlat/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>

#include "tiltlat/analytic.hpp"

namespace tiltlat {

void LatticeParams::validate() const {
  if (!(J > 0.0)) throw InvalidParameter("J must be positive, got " + std::to_string(J));
  if (!(dF >= 0.0)) throw InvalidParameter("dF must be non-negative");
  if (!(dFomega >= 0.0)) throw InvalidParameter("dFomega must be non-negative");
  if (dFomega > 0.0 && !(omega > 0.0))
    throw InvalidParameter("omega must be positive when the drive is on");
  if (!std::isfinite(g)) throw InvalidParameter("g must be finite");
}

double LatticeParams::bloch_period() const {
  if (!tilted()) throw ZeroTilt();
  return kTwoPi / dF;
}

double LatticeParams::localization_length() const {
  if (!tilted()) throw ZeroTilt();
  return J / dF;
}

double LatticeState::norm() const noexcept {
  double s = 0.0;
  for (const auto& c : amplitudes) s += std::norm(c);
  return s;
}

std::vector<double> LatticeState::density() const {
  std::vector<double> p(amplitudes.size());
  std::transform(amplitudes.begin(), amplitudes.end(), p.begin(),
                 [](const complex& c) { return std::norm(c); });
  return p;
}

std::string_view to_string(PacketKind kind) noexcept {
  switch (kind) {
    case PacketKind::CoherentGaussian:
      return "coherent";
    case PacketKind::IncoherentGaussian:
      return "incoherent";
  }
  return "unknown";
}

PacketKind packet_kind_from_string(std::string_view name) {
  if (name == "coherent") return PacketKind::CoherentGaussian;
  if (name == "incoherent") return PacketKind::IncoherentGaussian;
  throw InvalidParameter("unknown packet kind '" + std::string(name) +
                         "' (expected coherent or incoherent)");
}

void WavePacketSpec::validate() const {
  if (!(sigma0 >= 1.0))
    throw InvalidParameter("sigma0 must be at least one site, got " + std::to_string(sigma0));
  if (sigma0 < 5.0)
    std::cerr << "warning: sigma0 = " << sigma0
              << " is narrow; the discrete Gaussian deviates from the continuum limit\n";
}

namespace {

double gaussian_weight(long offset, double sigma0) {
  const double u = static_cast<double>(offset) / sigma0;
  return std::exp(-0.5 * u * u);
}

// Sum of weights for offsets >= first, summed until the terms vanish.
double tail_mass(long first, double sigma0) {
  double s = 0.0;
  for (long k = std::max(first, 0L);; ++k) {
    const double w = gaussian_weight(k, sigma0);
    s += w;
    if (w < 1e-300 || w < 1e-20 * s) break;
  }
  return s;
}

}  // namespace

std::vector<double> gaussian_density(const WavePacketSpec& spec, SiteRange window) {
  spec.validate();
  if (!window.contains(spec.center))
    throw WindowTooNarrow("packet center lies outside the site window");
  std::vector<double> rho(window.size());
  double inside = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    rho[i] = gaussian_weight(window.site(i) - spec.center, spec.sigma0);
    inside += rho[i];
  }
  const double outside = tail_mass(static_cast<long>(spec.center) - window.l_min + 1, spec.sigma0) +
                         tail_mass(static_cast<long>(window.l_max) - spec.center + 1, spec.sigma0);
  if (outside > 1e-12 * (inside + outside))
    throw WindowTooNarrow("Gaussian of width " + std::to_string(spec.sigma0) +
                          " loses more than 1e-12 of its mass outside [" +
                          std::to_string(window.l_min) + ", " + std::to_string(window.l_max) + "]");
  for (auto& r : rho) r /= inside;
  return rho;
}

LatticeState make_coherent(const WavePacketSpec& spec, SiteRange window) {
  const auto rho = gaussian_density(spec, window);
  LatticeState state{window, std::vector<complex>(rho.size()), 0.0};
  for (std::size_t i = 0; i < rho.size(); ++i) state.amplitudes[i] = std::sqrt(rho[i]);
  return state;
}

LatticeState make_incoherent_realization(const WavePacketSpec& spec, SiteRange window,
                                         std::uint64_t seed) {
  const auto rho = gaussian_density(spec, window);
  LatticeState state{window, std::vector<complex>(rho.size()), 0.0};
  for (std::size_t i = 0; i < rho.size(); ++i) {
    // Counter is the site index so the phase of site l does not depend on the window.
    const auto counter =
        static_cast<std::uint64_t>(static_cast<std::int64_t>(window.site(i)));
    const double theta = kTwoPi * uniform01(seed, counter);
    state.amplitudes[i] = std::polar(std::sqrt(rho[i]), theta);
  }
  return state;
}

LatticeState make_initial_state(const WavePacketSpec& spec, SiteRange window,
                                std::uint64_t seed) {
  return spec.kind == PacketKind::CoherentGaussian
             ? make_coherent(spec, window)
             : make_incoherent_realization(spec, window, seed);
}

SiteRange auto_window(const WavePacketSpec& spec, const LatticeParams& params,
                      std::optional<double> t_final) {
  double reach = std::max(8.0 * spec.sigma0, 512.0);
  const double static_length = params.tilted() ? params.J / params.dF : 0.0;
  if (params.tilted()) {
    reach = std::max(reach, 4.0 * static_length);
  } else if (t_final) {
    reach = std::max(reach, 8.0 * spec.sigma0 + params.J * *t_final);
  }
  if (params.driven() && params.tilted()) {
    const auto eff = analytic::effective_model(params, analytic::EffectiveVariant::BesselCorrected);
    double length = eff.L_eff ? 4.0 * std::abs(*eff.L_eff) : HUGE_VAL;
    if (t_final)
      length = std::min(length, 8.0 * spec.sigma0 + std::abs(eff.J_eff) * *t_final +
                                    4.0 * static_length);
    if (std::isfinite(length)) reach = std::max(reach, length);
  } else if (params.driven() && t_final) {
    reach = std::max(reach, 8.0 * spec.sigma0 + params.J * *t_final);
  }
  int half = 1;
  while (half < reach) half *= 2;
  // 2 half - 1 sites: the hopping transform then runs on a power-of-two FFT.
  return SiteRange::symmetric(spec.center, half - 1);
}

}  // namespace tiltlat
