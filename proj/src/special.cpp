#include "spinstar/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spinstar/angular_momentum.hpp"

namespace spinstar {

cplx log_cos(cplx z) {
  const cplx c = std::cos(z);
  if (c == cplx{}) return {-std::numeric_limits<double>::infinity(), 0.0};
  return std::log(c);
}

cplx stable_cos_pow(int n, cplx z) {
  if (n < 0) throw std::invalid_argument("stable_cos_pow: negative exponent");
  if (n == 0) return 1.0;
  const cplx c = std::cos(z);
  if (std::abs(c) < 1e-3) {
    cplx result = 1.0, base = c;
    for (int e = n; e > 0; e >>= 1) {
      if (e & 1) result *= base;
      base *= base;
    }
    return result;
  }
  return std::exp(static_cast<double>(n) * std::log(c));
}

cplx phase_integral(double mu, double t) {
  const double x = 0.5 * mu * t;
  // t * exp(i x) * sin(x)/x
  const double sinc = std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 + x * x * x * x / 120.0 : std::sin(x) / x;
  return t * sinc * std::polar(1.0, x);
}

cplx double_phase_integral(double mu, double t) {
  const double x = mu * t;
  if (std::abs(x) < 1e-3) {
    // t^2 * sum_k (i x)^k / (k+2)!
    cplx term = 0.5, sum = 0.0, ix{0.0, x};
    for (int k = 0; k < 8; ++k) {
      sum += term;
      term *= ix / static_cast<double>(k + 3);
    }
    return t * t * sum;
  }
  // (1 + i x - e^{i x}) / mu^2
  const cplx e = std::polar(1.0, x);
  return (cplx{1.0, x} - e) / (mu * mu);
}

std::vector<SpectralLine> cos_pow_spectrum(int n, double b, double log_scale, double drop_below) {
  if (n < 0) throw std::invalid_argument("cos_pow_spectrum: negative exponent");
  std::vector<double> logs(static_cast<std::size_t>(n) + 1);
  double log_max = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= n; ++k) {
    logs[static_cast<std::size_t>(k)] =
        log_binomial(n, k) - n * std::log(2.0) - 0.5 * (n - 2 * k) * b + log_scale;
    log_max = std::max(log_max, logs[static_cast<std::size_t>(k)]);
  }
  const double cut = log_max + std::log(drop_below);
  std::vector<SpectralLine> lines;
  for (int k = 0; k <= n; ++k) {
    if (logs[static_cast<std::size_t>(k)] < cut) continue;
    lines.push_back({std::exp(logs[static_cast<std::size_t>(k)]), 0.5 * (n - 2 * k)});
  }
  return lines;
}

}  // namespace spinstar
