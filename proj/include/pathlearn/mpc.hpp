#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pathlearn/belief.hpp"
#include "pathlearn/path.hpp"
#include "pathlearn/vehicle_model.hpp"
#include "pathlearn/wblr.hpp"

namespace pathlearn {

/// Tracking errors against the interpolated reference at s_ref. Contour is
/// perpendicular to the path (positive left), lag parallel to it.
struct ContourErrors {
  double lag = 0.0;
  double contour = 0.0;
  double heading_err = 0.0;
  double speed_err = 0.0;
  double turn_err = 0.0;
};

/// Virtual reference progress along the path; v_ref is the virtual input
/// that drives it.
struct ReferenceProgress {
  double s_ref = 0.0;
  double v_ref = 0.0;
};

struct CostWeights {
  double lag = 50.0;
  double contour = 200.0;
  double heading = 200.0;
  double speed = 2.0;
  double turn = 2.0;
  double v_cmd_dev = 1.0;
  double omega_cmd_dev = 1.0;
  double v_ref_dev = 50.0;
  double v_cmd_rate = 10.0;
  double omega_cmd_rate = 15.0;
  double v_ref_rate = 5.0;
  double slack_linear = 1e4;
  double slack_quadratic = 1e4;

  bool all_nonnegative() const;
};

struct InputBounds {
  double v_cmd_min = -0.5, v_cmd_max = 3.0;
  double omega_cmd_min = -2.5, omega_cmd_max = 2.5;
  double v_ref_min = 0.0, v_ref_max = 3.0;
};

struct ChanceConstraintConfig {
  double e_c_max = 2.0;  // maximum lateral error, m
  double r_c = 1.0;      // contouring quantile
  double r_u = 1.0;      // input quantile
  InputBounds bounds;
};

struct SqpSettings {
  int passes = 3;
  double trust_speed = 0.5;  // m/s per pass, v_cmd and v_ref
  double trust_turn = 0.5;   // rad/s per pass
  int qp_max_iterations = 2000;
};

struct ControllerConfig {
  int horizon = 30;
  double dt = 0.1;
  double desired_speed = 2.0;
  CostWeights weights;
  ChanceConstraintConfig chance;
  AncillaryGains gains;
  SqpSettings sqp;
  bool closed_loop_covariance = true;
};

/// Models used for one control step, one posterior per actuator channel.
struct ModelSet {
  wblr::NigPosterior speed;
  wblr::NigPosterior turn;

  ActuatorParams params() const;
  ParamCov param_cov() const;
  ProcessNoise noise() const;
};

struct SolveDiagnostics {
  int qp_iterations = 0;
  double kkt_residual = 0.0;      // worst pass
  double max_violation = 0.0;
  double max_slack = 0.0;
  std::vector<double> pass_cost;  // nonlinear cost after each pass
  bool converged = false;
};

/// Optimized horizon: inputs u_0..u_{N-1} with the virtual reference speed,
/// the rolled-out mean states (which satisfy the dynamics exactly), the
/// propagated beliefs, and the per-step contouring stds used to tighten.
struct HorizonSolution {
  std::vector<ControlInput> inputs;
  std::vector<double> v_ref;
  std::vector<FullState> states;        // size N+1 including the start
  std::vector<double> s_ref;            // size N+1
  std::vector<Belief> beliefs;          // size N+1
  std::vector<double> contour_std;      // size N+1, index 0 unused
  SolveDiagnostics diagnostics;

  const ControlInput& first_input() const { return inputs.front(); }
};

/// Errors of a state against the reference at progress.s_ref. The turn
/// reference is the path curvature times the desired speed.
ContourErrors contour_errors(const FullState& z, const Path& path,
                             const ReferenceProgress& progress,
                             double desired_speed);

/// Tightened contouring residual e_c + r_c sqrt(t_perp^T S t_perp) - e_max;
/// the chance constraint holds iff the result is <= 0.
double tighten_state_constraint(double e_c, const Belief& belief,
                                const Eigen::Vector2d& normal,
                                const ChanceConstraintConfig& cfg);

/// Tightened input residual u + r |gain| sigma_e - bound; <= 0 required.
double tighten_input_constraint(double u, double gain, double sigma_e,
                                double r, double bound);

/// Contouring MPC solved as an SQP: per pass the beliefs are propagated
/// along the nominal trajectory, dynamics and constraints linearized, and a
/// convex QP in the input correction solved with slack-augmented contouring
/// constraints and a per-variable trust region.
class MpcController {
 public:
  MpcController(const Path& path, const ControllerConfig& config);

  HorizonSolution solve(const Belief& initial, const ModelSet& models);

  /// Clears the warm start and reference progress (new run).
  void reset();

  const ControllerConfig& config() const { return config_; }

 private:
  const Path& path_;
  ControllerConfig config_;
  std::vector<Eigen::Vector3d> warm_inputs_;  // [v_cmd, omega_cmd, v_ref]
  Eigen::Vector3d previous_input_ = Eigen::Vector3d::Zero();
  double s_ref_hint_ = 0.0;
  bool have_warm_start_ = false;
};

}  // namespace pathlearn
