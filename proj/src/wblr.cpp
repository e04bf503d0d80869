#include "pathlearn/wblr.hpp"

#include <cmath>
#include <stdexcept>

#include "pathlearn/common.hpp"

namespace pathlearn::wblr {

namespace {

constexpr double kMinB = 1e-12;

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

void check_prior(const NigPosterior& p) {
  if (!p.valid()) throw std::invalid_argument("invalid NIG posterior");
}

}  // namespace

bool NigPosterior::valid() const {
  if (w_mean.size() == 0 || V.rows() != w_mean.size() || V.cols() != w_mean.size())
    return false;
  if (!w_mean.allFinite() || !V.allFinite()) return false;
  if (!(a > 0.0) || !(b > 0.0)) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (V + V.transpose()));
  return llt.info() == Eigen::Success;
}

NigPosterior NigPosterior::lag_prior(double tau, double sigma2_0, double a0) {
  NigPosterior p;
  p.w_mean = Eigen::Vector2d(1.0 / tau, -1.0 / tau);
  p.V = Eigen::Matrix2d::Identity();
  p.a = a0;
  p.b = a0 * sigma2_0;
  return p;
}

NigPosterior nig_update(const NigPosterior& prior,
                        std::span<const WeightedSample> data) {
  check_prior(prior);
  const int d = prior.dim();

  // Precision form of the prior.
  const Eigen::MatrixXd prior_sym = 0.5 * (prior.V + prior.V.transpose());
  Eigen::LDLT<Eigen::MatrixXd> prior_ldlt(prior_sym);
  if (prior_ldlt.info() != Eigen::Success)
    throw std::runtime_error("prior V not positive definite");
  const Eigen::MatrixXd lambda0 = prior_ldlt.solve(Eigen::MatrixXd::Identity(d, d));

  Eigen::MatrixXd lambda_n = 0.5 * (lambda0 + lambda0.transpose());
  Eigen::VectorXd rhs = lambda_n * prior.w_mean;  // V0^{-1} w0
  const Eigen::VectorXd lambda0_w0 = rhs;

  double weight_sum = 0.0;
  double weighted_gg = 0.0;
  Eigen::VectorXd xlg = Eigen::VectorXd::Zero(d);
  for (const WeightedSample& s : data) {
    if (s.x.size() != d) throw std::invalid_argument("feature dimension mismatch");
    if (!finite(s.x) || !std::isfinite(s.g))
      throw std::invalid_argument("non-finite sample");
    if (!(s.weight >= 0.0 && s.weight <= 1.0))
      throw std::invalid_argument("sample weight outside [0, 1]");
    if (s.weight == 0.0) continue;
    lambda_n.noalias() += s.weight * (s.x * s.x.transpose());
    xlg.noalias() += s.weight * s.g * s.x;
    weighted_gg += s.weight * s.g * s.g;
    weight_sum += s.weight;
  }
  rhs += xlg;

  lambda_n = 0.5 * (lambda_n + lambda_n.transpose());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(lambda_n);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any())
    throw std::runtime_error("posterior precision lost positive definiteness");

  NigPosterior post;
  post.w_mean = ldlt.solve(rhs);
  post.V = ldlt.solve(Eigen::MatrixXd::Identity(d, d));
  post.V = 0.5 * (post.V + post.V.transpose()).eval();
  post.a = prior.a + 0.5 * weight_sum;
  // b update written to avoid cancellation between large quadratics:
  //   b0 + (w0 - wN)^T Lambda0 w0 / 2 + (g - X wN)^T L g / 2.
  double residual_term = weighted_gg - post.w_mean.dot(xlg);
  double prior_term = (prior.w_mean - post.w_mean).dot(lambda0_w0);
  post.b = std::max(prior.b + 0.5 * (prior_term + residual_term), kMinB);
  if (!post.w_mean.allFinite() || !std::isfinite(post.b))
    throw std::runtime_error("non-finite posterior");
  return post;
}

NigPosterior recursive_step(const NigPosterior& prior,
                            const WeightedSample& sample, double n0) {
  if (!(n0 > 0.0)) throw std::invalid_argument("n0 must be positive");
  if (sample.weight != 1.0)
    throw std::invalid_argument("recursive_step requires weight 1");
  const bool below_strength = prior.a < 0.5 * n0;
  NigPosterior post = nig_update(prior, std::span(&sample, 1));
  if (below_strength) return post;
  // Re-weighting keeps the effective prior strength at n0. Products are
  // formed before the division so the a = n0/2 fixed point is exact.
  post.V *= (n0 + 1.0) / n0;
  post.a = (n0 * post.a) / (n0 + 1.0);
  post.b = (n0 * post.b) / (n0 + 1.0);
  return post;
}

PosteriorMarginals marginals(const NigPosterior& p) {
  check_prior(p);
  PosteriorMarginals m;
  m.w_mean = p.w_mean;
  m.w_scale = (p.b / p.a) * p.V;
  m.dof = 2.0 * p.a;
  m.sigma2_mode = p.b / (p.a + 1.0);
  if (p.a > 1.0) {
    m.sigma2_mean = p.b / (p.a - 1.0);
    m.sigma2_mean_defined = true;
  } else {
    m.sigma2_mean = m.sigma2_mode;
    m.sigma2_mean_defined = false;
  }
  return m;
}

double sigma2_point_estimate(const NigPosterior& p) {
  return p.a > 1.0 ? p.b / (p.a - 1.0) : p.b / (p.a + 1.0);
}

Prediction predict(const NigPosterior& p, const Eigen::VectorXd& x) {
  if (x.size() != p.w_mean.size())
    throw std::invalid_argument("query dimension mismatch");
  Prediction out;
  out.mean = p.w_mean.dot(x);
  out.variance = (p.b / p.a) * (1.0 + x.dot(p.V * x));
  out.dof = 2.0 * p.a;
  return out;
}

double log_predictive_density(const NigPosterior& p, const Eigen::VectorXd& x,
                              double g, PredictiveFamily family) {
  const Prediction pred = predict(p, x);
  const double s2 = pred.variance;
  const double r = g - pred.mean;
  if (family == PredictiveFamily::kGaussian) {
    return -0.5 * std::log(2.0 * kPi * s2) - 0.5 * r * r / s2;
  }
  const double nu = pred.dof;
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * kPi * s2) -
         0.5 * (nu + 1.0) * std::log1p(r * r / (nu * s2));
}

}  // namespace pathlearn::wblr
