#include <cmath>
#include <string>

#include "tiltlat/analytic.hpp"

namespace tiltlat::analytic {

namespace {

constexpr int kMaxOrder = 10000;
constexpr double kMaxArgument = 1e4;
constexpr double kSeriesBelow = 1.0;
constexpr double kRescaleAbove = 1e250;

void check_domain(int n, double z) {
  if (!std::isfinite(z) || std::abs(z) > kMaxArgument)
    throw OutOfRange("Bessel argument outside |z| <= 1e4: " + std::to_string(z));
  if (n > kMaxOrder || n < -kMaxOrder)
    throw OutOfRange("Bessel order outside |n| <= 1e4: " + std::to_string(n));
}

// Power series, z in (0, 1).
double series(int n, double z) {
  const double half = 0.5 * z;
  const double q = -half * half;
  double term = std::exp(n * std::log(half) - std::lgamma(n + 1.0));
  double sum = term;
  for (int k = 1; k < 60; ++k) {
    term *= q / (static_cast<double>(k) * (n + k));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

// J_0..J_nmax(z) for z >= kSeriesBelow by downward recurrence from an order
// far enough above max(n_max, z) that the start values are negligible.
std::vector<double> miller(int n_max, double z) {
  const double top = std::max(static_cast<double>(n_max), z) + 40.0 + 12.0 * std::cbrt(z);
  int start = static_cast<int>(std::ceil(top));
  start += start % 2;

  std::vector<double> j(static_cast<std::size_t>(start) + 2, 0.0);
  j[start] = 1e-30;
  double even_sum = 0.0;  // J_0 + 2 sum_k J_2k, unnormalized
  const double two_over_z = 2.0 / z;
  for (int k = start; k >= 1; --k) {
    j[k - 1] = k * two_over_z * j[k] - j[k + 1];
    if (k % 2 == 0) even_sum += 2.0 * j[k];
    if (std::abs(j[k - 1]) > kRescaleAbove) {
      for (int i = k - 1; i <= start; ++i) j[i] /= kRescaleAbove;
      even_sum /= kRescaleAbove;
    }
  }
  even_sum += j[0];
  j.resize(static_cast<std::size_t>(n_max) + 1);
  for (auto& v : j) v /= even_sum;
  return j;
}

}  // namespace

std::vector<double> bessel_j_sequence(int n_max, double z) {
  check_domain(n_max, z);
  if (n_max < 0) throw OutOfRange("bessel_j_sequence needs n_max >= 0");
  const double az = std::abs(z);
  std::vector<double> out;
  if (az == 0.0) {
    out.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    out[0] = 1.0;
  } else if (az < kSeriesBelow) {
    out.resize(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) out[n] = series(n, az);
  } else {
    out = miller(n_max, az);
  }
  if (z < 0.0)
    for (int n = 1; n <= n_max; n += 2) out[n] = -out[n];
  return out;
}

double bessel_j(int n, double z) {
  check_domain(n, z);
  const int order = n < 0 ? -n : n;
  const double sign = (n < 0 && order % 2 == 1) ? -1.0 : 1.0;
  const double az = std::abs(z);
  double value = 0.0;
  if (az == 0.0)
    value = order == 0 ? 1.0 : 0.0;
  else if (az < kSeriesBelow)
    value = series(order, az);
  else
    value = miller(order, az)[order];
  if (z < 0.0 && order % 2 == 1) value = -value;
  return sign * value;
}

}  // namespace tiltlat::analytic
