#include "pathlearn/belief.hpp"

#include <stdexcept>

namespace pathlearn {

namespace {

constexpr double kPsdTolerance = 1e-10;

Eigen::Matrix<double, 5, 5> floor_psd(const Eigen::Matrix<double, 5, 5>& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 5, 5>> eig(m);
  if ((eig.eigenvalues().array() >= 0.0).all()) return m;
  const Eigen::Matrix<double, 5, 1> clipped = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Eigen::Matrix4d ParamCov::block_diag() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m.topLeftCorner<2, 2>() = speed;
  m.bottomRightCorner<2, 2>() = turn;
  return m;
}

ParamCov ParamCov::from_posteriors(const wblr::NigPosterior& speed_model,
                                   const wblr::NigPosterior& turn_model) {
  ParamCov pc;
  pc.speed = (speed_model.b / speed_model.a) * speed_model.V;
  pc.turn = (turn_model.b / turn_model.a) * turn_model.V;
  return pc;
}

ProcessNoise ProcessNoise::from_posteriors(const wblr::NigPosterior& speed_model,
                                           const wblr::NigPosterior& turn_model) {
  return ProcessNoise{wblr::sigma2_point_estimate(speed_model),
                      wblr::sigma2_point_estimate(turn_model)};
}

Belief propagate(const Belief& b, const ControlInput& u,
                 const ActuatorParams& params, const ParamCov& pcov,
                 const ProcessNoise& noise, double dt,
                 const PropagateOptions& opts) {
  {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 5, 5>> eig(b.cov);
    if (eig.eigenvalues().minCoeff() < -kPsdTolerance)
      throw std::invalid_argument("belief covariance is indefinite");
  }

  Belief next;
  next.mean = step_mean(b.mean, u, params, dt);

  Eigen::Matrix<double, 5, 5> A_z;
  Eigen::Matrix<double, 5, 4> A_w;
  jacobians(b.mean, u, params, dt, opts.gains, opts.closed_loop_covariance,
            A_z, A_w);

  Eigen::Matrix<double, 5, 5> cov =
      A_z * b.cov * A_z.transpose() +
      A_w * pcov.block_diag() * A_w.transpose();
  cov(3, 3) += dt * dt * noise.sigma2_v;
  cov(4, 4) += dt * dt * noise.sigma2_omega;
  cov = 0.5 * (cov + cov.transpose()).eval();
  next.cov = floor_psd(cov);
  return next;
}

double directional_std(const Belief& b, const Eigen::Vector2d& direction) {
  const Eigen::Matrix2d pos_cov = b.cov.topLeftCorner<2, 2>();
  const double quad = direction.dot(pos_cov * direction);
  return std::sqrt(std::max(quad, 0.0));
}

}  // namespace pathlearn
