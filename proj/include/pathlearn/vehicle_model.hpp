#pragma once

#include <Eigen/Dense>
#include <utility>

namespace pathlearn {

/// Full vehicle state z = [x, y, theta, v, omega]. Heading is kept in
/// (-pi, pi].
struct FullState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  double omega = 0.0;

  Eigen::Matrix<double, 5, 1> vec() const {
    return (Eigen::Matrix<double, 5, 1>() << x, y, theta, v, omega).finished();
  }
  static FullState from_vec(const Eigen::Matrix<double, 5, 1>& z);
};

struct ControlInput {
  double v_cmd = 0.0;
  double omega_cmd = 0.0;
};

/// Learned actuator dynamics: d(xi)/dt = w . [command, xi] per channel.
struct ActuatorParams {
  Eigen::Vector2d w_v = Eigen::Vector2d(2.0, -2.0);
  Eigen::Vector2d w_omega = Eigen::Vector2d(2.0, -2.0);
};

/// Linear feedback on speed and heading deviation from the predicted mean,
/// applied inside the command channels.
struct AncillaryGains {
  double k_v = -5.0;
  double k_theta = -5.0;
};

/// One Euler step of the mean dynamics (no noise, no feedback).
FullState step_mean(const FullState& z, const ControlInput& u,
                    const ActuatorParams& p, double dt);

/// Analytic Jacobians of step_mean with respect to the state (A_z, 5x5) and
/// the stacked parameters [w_v; w_omega] (A_w, 5x4). With `closed_loop` the
/// commands carry the ancillary terms K_v e^v and K_theta e^theta, which
/// adds dt K_v w_v[0] to dv'/dv and dt K_theta w_omega[0] to domega'/dtheta.
void jacobians(const FullState& z, const ControlInput& u,
               const ActuatorParams& p, double dt, const AncillaryGains& gains,
               bool closed_loop, Eigen::Matrix<double, 5, 5>& A_z,
               Eigen::Matrix<double, 5, 4>& A_w);

/// Regression datum for one actuator channel.
struct ChannelSample {
  Eigen::Vector2d x;  // [command, actuator state]
  double g = 0.0;     // (xi_next - xi) / dt
};

/// Builds the speed- and turn-channel samples from consecutive actuator
/// states and the applied command: g = (xi_{k+1} - xi_k) / dt.
std::pair<ChannelSample, ChannelSample> feature_and_target(
    double v_k, double omega_k, const ControlInput& u, double v_next,
    double omega_next, double dt);

}  // namespace pathlearn
