#pragma once

#include <Eigen/Dense>

#include "pathlearn/vehicle_model.hpp"
#include "pathlearn/wblr.hpp"

namespace pathlearn {

/// Gaussian belief over the full state.
struct Belief {
  FullState mean;
  Eigen::Matrix<double, 5, 5> cov = Eigen::Matrix<double, 5, 5>::Zero();
};

/// Block-diagonal parameter covariance, one 2x2 block per actuator channel,
/// taken from the posterior marginal scale (b/a) V.
struct ParamCov {
  Eigen::Matrix2d speed = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d turn = Eigen::Matrix2d::Zero();

  Eigen::Matrix4d block_diag() const;
  static ParamCov from_posteriors(const wblr::NigPosterior& speed_model,
                                  const wblr::NigPosterior& turn_model);
};

/// Per-channel output-noise variances entering the process noise as
/// dt^2 sigma2 on the actuator rows.
struct ProcessNoise {
  double sigma2_v = 0.0;
  double sigma2_omega = 0.0;

  static ProcessNoise from_posteriors(const wblr::NigPosterior& speed_model,
                                      const wblr::NigPosterior& turn_model);
};

struct PropagateOptions {
  AncillaryGains gains;
  /// Use the ancillary closed-loop Jacobian for covariance propagation
  /// (tube shrinking). The mean always steps with the nominal input.
  bool closed_loop_covariance = true;
};

/// One EKF prediction step: the mean follows step_mean, the covariance is
/// A_z S A_z^T + A_w S_ww A_w^T + Q with symmetry re-enforced and tiny
/// negative eigenvalues floored at zero. Throws on an indefinite input.
Belief propagate(const Belief& b, const ControlInput& u,
                 const ActuatorParams& params, const ParamCov& pcov,
                 const ProcessNoise& noise, double dt,
                 const PropagateOptions& opts);

/// Standard deviation of position error along a unit direction in the
/// plane: sqrt(d^T S_pos d).
double directional_std(const Belief& b, const Eigen::Vector2d& direction);

}  // namespace pathlearn
