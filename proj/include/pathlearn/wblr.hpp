#pragma once

#include <Eigen/Dense>
#include <span>

namespace pathlearn::wblr {

/// One regression datum: feature vector x, scalar target g, and an
/// importance weight in [0, 1]. A weight of 0 leaves the posterior
/// untouched; two identical points at weight 0.5 contribute exactly as
/// much as one point at weight 1.
struct WeightedSample {
  Eigen::VectorXd x;
  double g = 0.0;
  double weight = 1.0;
};

/// Normal-Inverse-Gamma parameter set for one output dimension:
///   w | sigma2 ~ N(w_mean, sigma2 * V),  sigma2 ~ IG(a, b).
struct NigPosterior {
  Eigen::VectorXd w_mean;
  Eigen::MatrixXd V;
  double a = 1.0;
  double b = 1.0;

  int dim() const { return static_cast<int>(w_mean.size()); }
  bool valid() const;

  /// Prior encoding a stable first-order lag xi_dot = (u - xi) / tau on a
  /// [command, state] feature pair: w = [1/tau, -1/tau], V = I, a = a0,
  /// b = a0 * sigma2_0.
  static NigPosterior lag_prior(double tau = 0.5, double sigma2_0 = 0.25,
                                double a0 = 2.0);
};

/// Marginals of the NIG posterior: sigma2 ~ IG(a, b) and
/// w ~ Student-t(w_mean, (b/a) V, 2a).
struct PosteriorMarginals {
  Eigen::VectorXd w_mean;
  Eigen::MatrixXd w_scale;        // (b/a) * V
  double dof = 0.0;               // 2a
  double sigma2_mean = 0.0;       // b/(a-1), defined for a > 1
  double sigma2_mode = 0.0;       // b/(a+1)
  bool sigma2_mean_defined = false;
};

/// Posterior predictive of the target at a query point. Student-t with the
/// given mean, squared scale and degrees of freedom.
struct Prediction {
  double mean = 0.0;
  double variance = 0.0;  // (b/a)(1 + x^T V x)
  double dof = 0.0;       // 2a

  /// Gaussian approximation (dof -> infinity): same mean and variance.
  double gaussian_mean() const { return mean; }
  double gaussian_variance() const { return variance; }
};

enum class PredictiveFamily { kStudentT, kGaussian };

/// Batch weighted conjugate update. Accumulates the precision
/// V0^{-1} + X^T L X through a symmetric LDLT factorization; the result
/// matches the closed-form textbook update to 1e-9. b is floored at 1e-12.
/// Throws std::invalid_argument on non-finite data or weights outside
/// [0, 1], std::runtime_error if the updated V is not positive definite.
NigPosterior nig_update(const NigPosterior& prior,
                        std::span<const WeightedSample> data);

/// Streaming update with the effective prior strength held at n0. Below
/// a = n0/2 this is a plain unit-weight update; at or above, the posterior
/// is rescaled (V *= (n0+1)/n0, a and b *= n0/(n0+1)) so a returns to n0/2
/// at the fixed point. The sample weight must be exactly 1.
NigPosterior recursive_step(const NigPosterior& prior,
                            const WeightedSample& sample, double n0);

PosteriorMarginals marginals(const NigPosterior& p);

/// Point estimate of the output variance: posterior mean b/(a-1) when
/// a > 1, otherwise the mode b/(a+1).
double sigma2_point_estimate(const NigPosterior& p);

Prediction predict(const NigPosterior& p, const Eigen::VectorXd& x);

/// Log density of target g under the posterior predictive at x.
double log_predictive_density(const NigPosterior& p, const Eigen::VectorXd& x,
                              double g,
                              PredictiveFamily family = PredictiveFamily::kStudentT);

}  // namespace pathlearn::wblr
