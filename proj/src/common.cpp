#include "pathlearn/common.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace pathlearn {

double wrap_angle(double theta) {
  double wrapped = std::fmod(theta + kPi, 2.0 * kPi);
  if (wrapped <= 0.0) wrapped += 2.0 * kPi;
  return wrapped - kPi;
}

double Rng::uniform() {
  // 53-bit mantissa draw in [0, 1).
  const std::uint64_t bits = engine_() >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

double Rng::normal(double mean, double std) {
  if (have_spare_) {
    have_spare_ = false;
    return mean + std * spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * kPi * u2;
  spare_ = radius * std::sin(angle);
  have_spare_ = true;
  return mean + std * radius * std::cos(angle);
}

namespace stats {

double gaussian_two_sided_exceedance(double r) {
  return std::erfc(r / std::sqrt(2.0));
}

double binomial_tail_geq(int k, int n, double p) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  // Sum the upper tail in log space, smallest terms first.
  long double tail = 0.0L;
  for (int i = n; i >= k; --i) {
    long double log_term = std::lgammal(n + 1.0L) - std::lgammal(i + 1.0L) -
                           std::lgammal(n - i + 1.0L) +
                           i * std::logl(static_cast<long double>(p)) +
                           (n - i) * std::log1pl(-static_cast<long double>(p));
    tail += std::expl(log_term);
  }
  return static_cast<double>(std::min(tail, 1.0L));
}

int binomial_reject_threshold(int n, double p, double alpha) {
  for (int k = 0; k <= n; ++k) {
    if (binomial_tail_geq(k, n, p) < alpha) return k;
  }
  return n + 1;
}

double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("percentile of empty range");
  if (sorted.size() == 1) return sorted[0];
  const double h = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  return percentile_sorted(values, q);
}

double median(std::vector<double> values) {
  return percentile(std::move(values), 0.5);
}

}  // namespace stats

namespace io {

std::string format_full(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace io

}  // namespace pathlearn
