#include "pathlearn/vehicle_model.hpp"

#include <cmath>
#include <stdexcept>

#include "pathlearn/common.hpp"

namespace pathlearn {

FullState FullState::from_vec(const Eigen::Matrix<double, 5, 1>& z) {
  return FullState{z(0), z(1), wrap_angle(z(2)), z(3), z(4)};
}

FullState step_mean(const FullState& z, const ControlInput& u,
                    const ActuatorParams& p, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  FullState next;
  next.x = z.x + dt * z.v * std::cos(z.theta);
  next.y = z.y + dt * z.v * std::sin(z.theta);
  next.theta = wrap_angle(z.theta + dt * z.omega);
  next.v = z.v + dt * (p.w_v(0) * u.v_cmd + p.w_v(1) * z.v);
  next.omega = z.omega + dt * (p.w_omega(0) * u.omega_cmd + p.w_omega(1) * z.omega);
  return next;
}

void jacobians(const FullState& z, const ControlInput& u,
               const ActuatorParams& p, double dt, const AncillaryGains& gains,
               bool closed_loop, Eigen::Matrix<double, 5, 5>& A_z,
               Eigen::Matrix<double, 5, 4>& A_w) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  A_z.setIdentity();
  A_z(0, 2) = -dt * z.v * std::sin(z.theta);
  A_z(0, 3) = dt * std::cos(z.theta);
  A_z(1, 2) = dt * z.v * std::cos(z.theta);
  A_z(1, 3) = dt * std::sin(z.theta);
  A_z(2, 4) = dt;
  A_z(3, 3) = 1.0 + dt * p.w_v(1);
  A_z(4, 4) = 1.0 + dt * p.w_omega(1);
  if (closed_loop) {
    A_z(3, 3) += dt * gains.k_v * p.w_v(0);
    A_z(4, 2) += dt * gains.k_theta * p.w_omega(0);
  }

  // Ancillary errors vanish on the mean trajectory, so A_w is the same
  // open or closed loop.
  A_w.setZero();
  A_w(3, 0) = dt * u.v_cmd;
  A_w(3, 1) = dt * z.v;
  A_w(4, 2) = dt * u.omega_cmd;
  A_w(4, 3) = dt * z.omega;
}

std::pair<ChannelSample, ChannelSample> feature_and_target(
    double v_k, double omega_k, const ControlInput& u, double v_next,
    double omega_next, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  ChannelSample speed{Eigen::Vector2d(u.v_cmd, v_k), (v_next - v_k) / dt};
  ChannelSample turn{Eigen::Vector2d(u.omega_cmd, omega_k),
                     (omega_next - omega_k) / dt};
  return {speed, turn};
}

}  // namespace pathlearn
