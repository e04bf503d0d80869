#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace pathlearn {

constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle to (-pi, pi].
double wrap_angle(double theta);

/// Deterministic random stream. Gaussian draws use Box-Muller on explicit
/// 53-bit uniforms so that sequences do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();                       // [0, 1)
  double normal(double mean = 0.0, double std = 1.0);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

namespace stats {

/// P(|Z| > r) for a standard normal variable. 0.0455 at r = 2.
double gaussian_two_sided_exceedance(double r);

/// One-sided upper binomial tail P(X >= k) with X ~ Binomial(n, p).
double binomial_tail_geq(int k, int n, double p);

/// Smallest k such that P(X >= k | n, p) < alpha.
int binomial_reject_threshold(int n, double p, double alpha);

/// Linear interpolation between closest ranks. `q` in [0, 1]; `sorted`
/// must be ascending and non-empty.
double percentile_sorted(std::span<const double> sorted, double q);

/// Convenience: copies, sorts, interpolates.
double percentile(std::vector<double> values, double q);

double median(std::vector<double> values);

}  // namespace stats

namespace io {

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_full(double value);

}  // namespace io

}  // namespace pathlearn
