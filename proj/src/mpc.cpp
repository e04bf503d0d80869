#include "pathlearn/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pathlearn/common.hpp"
#include "pathlearn/qp.hpp"

namespace pathlearn {

namespace {

// Column layout of the QP decision vector: 3 input corrections per step
// [v_cmd, omega_cmd, v_ref], then one contouring slack per horizon state.
struct Layout {
  int horizon;
  int input_vars() const { return 3 * horizon; }
  int slack(int k) const { return input_vars() + k - 1; }  // k = 1..N
  int total() const { return input_vars() + horizon; }
};

struct StepErrors {
  ContourErrors e;
  // Gradient rows with respect to [x, y, theta, v, omega, s_ref].
  Eigen::Matrix<double, 5, 6> grad;  // rows: lag, contour, heading, speed, turn
};

StepErrors evaluate_errors(const FullState& z, const Path& path, double s_ref,
                           double desired_speed) {
  const PathPoint ref = path.at(s_ref);
  const Eigen::Vector2d offset = Eigen::Vector2d(z.x, z.y) - ref.position;

  StepErrors out;
  out.e.lag = ref.tangent.dot(offset);
  out.e.contour = ref.normal.dot(offset);
  out.e.heading_err = wrap_angle(z.theta - ref.heading);
  out.e.speed_err = z.v - desired_speed;
  out.e.turn_err = z.omega - ref.curvature * desired_speed;

  out.grad.setZero();
  // d(tangent)/ds = kappa * normal, d(normal)/ds = -kappa * tangent.
  out.grad.row(0) << ref.tangent.x(), ref.tangent.y(), 0, 0, 0,
      ref.curvature * out.e.contour - 1.0;
  out.grad.row(1) << ref.normal.x(), ref.normal.y(), 0, 0, 0,
      -ref.curvature * out.e.lag;
  out.grad.row(2) << 0, 0, 1, 0, 0, -ref.curvature;
  out.grad.row(3) << 0, 0, 0, 1, 0, 0;
  out.grad.row(4) << 0, 0, 0, 0, 1, 0;
  return out;
}

struct Nominal {
  std::vector<FullState> states;  // N+1
  std::vector<double> s_ref;      // N+1
};

Nominal rollout(const FullState& z0, double s0,
                const std::vector<Eigen::Vector3d>& inputs,
                const ActuatorParams& params, double dt, double path_length) {
  Nominal nom;
  const int n = static_cast<int>(inputs.size());
  nom.states.resize(n + 1);
  nom.s_ref.resize(n + 1);
  nom.states[0] = z0;
  nom.s_ref[0] = s0;
  for (int k = 0; k < n; ++k) {
    const ControlInput u{inputs[k](0), inputs[k](1)};
    nom.states[k + 1] = step_mean(nom.states[k], u, params, dt);
    nom.s_ref[k + 1] = std::min(nom.s_ref[k] + dt * inputs[k](2), path_length);
  }
  return nom;
}

}  // namespace

bool CostWeights::all_nonnegative() const {
  const double entries[] = {lag,        contour,        heading,
                            speed,      turn,           v_cmd_dev,
                            omega_cmd_dev, v_ref_dev,   v_cmd_rate,
                            omega_cmd_rate, v_ref_rate, slack_linear,
                            slack_quadratic};
  return std::all_of(std::begin(entries), std::end(entries),
                     [](double w) { return w >= 0.0 && std::isfinite(w); });
}

ActuatorParams ModelSet::params() const {
  ActuatorParams p;
  p.w_v = speed.w_mean;
  p.w_omega = turn.w_mean;
  return p;
}

ParamCov ModelSet::param_cov() const {
  return ParamCov::from_posteriors(speed, turn);
}

ProcessNoise ModelSet::noise() const {
  return ProcessNoise::from_posteriors(speed, turn);
}

ContourErrors contour_errors(const FullState& z, const Path& path,
                             const ReferenceProgress& progress,
                             double desired_speed) {
  const double s = std::clamp(progress.s_ref, 0.0, path.length());
  return evaluate_errors(z, path, s, desired_speed).e;
}

double tighten_state_constraint(double e_c, const Belief& belief,
                                const Eigen::Vector2d& normal,
                                const ChanceConstraintConfig& cfg) {
  return e_c + cfg.r_c * directional_std(belief, normal) - cfg.e_c_max;
}

double tighten_input_constraint(double u, double gain, double sigma_e,
                                double r, double bound) {
  if (sigma_e < 0.0) throw std::invalid_argument("sigma_e must be >= 0");
  return u + r * std::abs(gain) * sigma_e - bound;
}

MpcController::MpcController(const Path& path, const ControllerConfig& config)
    : path_(path), config_(config) {
  if (config_.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(config_.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!config_.weights.all_nonnegative())
    throw std::invalid_argument("cost weights must be nonnegative");
  const InputBounds& b = config_.chance.bounds;
  if (b.v_cmd_min > b.v_cmd_max || b.omega_cmd_min > b.omega_cmd_max ||
      b.v_ref_min > b.v_ref_max)
    throw std::invalid_argument("inconsistent input bounds");
  reset();
}

void MpcController::reset() {
  warm_inputs_.clear();
  have_warm_start_ = false;
  s_ref_hint_ = 0.0;
  previous_input_ = Eigen::Vector3d::Zero();
}

HorizonSolution MpcController::solve(const Belief& initial,
                                     const ModelSet& models) {
  if (!models.speed.valid() || !models.turn.valid())
    throw std::invalid_argument("MPC received an invalid model");

  const int N = config_.horizon;
  const double dt = config_.dt;
  const double v_des = config_.desired_speed;
  const CostWeights& w = config_.weights;
  const ChanceConstraintConfig& chance = config_.chance;
  const Layout layout{N};

  const ActuatorParams params = models.params();
  const ParamCov pcov = models.param_cov();
  const ProcessNoise noise = models.noise();
  const PropagateOptions prop_opts{config_.gains, config_.closed_loop_covariance};

  const Eigen::Vector2d position(initial.mean.x, initial.mean.y);
  const double s0 =
      have_warm_start_
          ? path_.project(position, s_ref_hint_, 2.0, 3.0 + v_des)
          : path_.project(position, 0.0, 1.0, 5.0 + v_des);

  std::vector<Eigen::Vector3d> inputs;
  if (have_warm_start_ && static_cast<int>(warm_inputs_.size()) == N) {
    inputs = warm_inputs_;
  } else {
    inputs.assign(N, Eigen::Vector3d::Zero());
    for (int k = 0; k < N; ++k) {
      const double s_guess = std::min(s0 + k * dt * v_des, path_.length());
      inputs[k] << v_des, path_.at(s_guess).curvature * v_des, v_des;
    }
  }

  HorizonSolution sol;
  sol.diagnostics.converged = true;

  std::vector<Belief> beliefs(N + 1);
  std::vector<double> contour_sigma(N + 1, 0.0);
  std::vector<double> sigma_v(N + 1, 0.0), sigma_theta(N + 1, 0.0);
  Nominal nom;

  auto propagate_horizon = [&](const Nominal& nominal) {
    beliefs[0] = initial;
    sigma_v[0] = std::sqrt(std::max(initial.cov(3, 3), 0.0));
    sigma_theta[0] = std::sqrt(std::max(initial.cov(2, 2), 0.0));
    for (int k = 0; k < N; ++k) {
      const ControlInput u{inputs[k](0), inputs[k](1)};
      Belief b{nominal.states[k], beliefs[k].cov};
      beliefs[k + 1] = propagate(b, u, params, pcov, noise, dt, prop_opts);
      sigma_v[k + 1] = std::sqrt(std::max(beliefs[k + 1].cov(3, 3), 0.0));
      sigma_theta[k + 1] = std::sqrt(std::max(beliefs[k + 1].cov(2, 2), 0.0));
      contour_sigma[k + 1] = directional_std(
          beliefs[k + 1], path_.at(nominal.s_ref[k + 1]).normal);
    }
  };

  auto nonlinear_cost = [&](const Nominal& nominal) {
    double cost = 0.0;
    for (int k = 1; k <= N; ++k) {
      const StepErrors se =
          evaluate_errors(nominal.states[k], path_, nominal.s_ref[k], v_des);
      cost += w.lag * se.e.lag * se.e.lag +
              w.contour * se.e.contour * se.e.contour +
              w.heading * se.e.heading_err * se.e.heading_err +
              w.speed * se.e.speed_err * se.e.speed_err +
              w.turn * se.e.turn_err * se.e.turn_err;
      const double viol = std::max(
          0.0, std::abs(se.e.contour) + chance.r_c * contour_sigma[k] -
                   chance.e_c_max);
      cost += w.slack_linear * viol + w.slack_quadratic * viol * viol;
    }
    Eigen::Vector3d prev = previous_input_;
    for (int k = 0; k < N; ++k) {
      const double kappa_ref = path_.at(nominal.s_ref[k]).curvature;
      const Eigen::Vector3d ref(v_des, kappa_ref * v_des, v_des);
      const Eigen::Vector3d dev = inputs[k] - ref;
      cost += w.v_cmd_dev * dev(0) * dev(0) +
              w.omega_cmd_dev * dev(1) * dev(1) + w.v_ref_dev * dev(2) * dev(2);
      const Eigen::Vector3d rate = inputs[k] - prev;
      cost += w.v_cmd_rate * rate(0) * rate(0) +
              w.omega_cmd_rate * rate(1) * rate(1) +
              w.v_ref_rate * rate(2) * rate(2);
      prev = inputs[k];
    }
    return cost;
  };

  for (int pass = 0; pass < config_.sqp.passes; ++pass) {
    nom = rollout(initial.mean, s0, inputs, params, dt, path_.length());
    propagate_horizon(nom);

    // Effective input intervals: chance tightening capped at 45% of the
    // interval so the problem stays feasible, then the nominal is clamped
    // so that a zero correction is always admissible.
    std::vector<Eigen::Vector3d> lo(N), hi(N);
    for (int k = 0; k < N; ++k) {
      const InputBounds& b = chance.bounds;
      const double tv = std::min(
          chance.r_u * std::abs(config_.gains.k_v) * sigma_v[k],
          0.45 * (b.v_cmd_max - b.v_cmd_min));
      const double tw = std::min(
          chance.r_u * std::abs(config_.gains.k_theta) * sigma_theta[k],
          0.45 * (b.omega_cmd_max - b.omega_cmd_min));
      lo[k] << b.v_cmd_min + tv, b.omega_cmd_min + tw, b.v_ref_min;
      hi[k] << b.v_cmd_max - tv, b.omega_cmd_max - tw, b.v_ref_max;
      for (int j = 0; j < 3; ++j)
        inputs[k](j) = std::clamp(inputs[k](j), lo[k](j), hi[k](j));
    }
    nom = rollout(initial.mean, s0, inputs, params, dt, path_.length());
    propagate_horizon(nom);

    // Linearized state sensitivities d(state_k)/d(inputs).
    std::vector<Eigen::MatrixXd> phi(N + 1);
    phi[0] = Eigen::MatrixXd::Zero(6, layout.input_vars());
    Eigen::Matrix<double, 5, 5> A_z;
    Eigen::Matrix<double, 5, 4> A_w;
    for (int k = 0; k < N; ++k) {
      const ControlInput u{inputs[k](0), inputs[k](1)};
      jacobians(nom.states[k], u, params, dt, config_.gains, false, A_z, A_w);
      Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Identity();
      A.topLeftCorner<5, 5>() = A_z;
      Eigen::Matrix<double, 6, 3> B = Eigen::Matrix<double, 6, 3>::Zero();
      B(3, 0) = dt * params.w_v(0);
      B(4, 1) = dt * params.w_omega(0);
      B(5, 2) = dt;
      phi[k + 1] = A * phi[k];
      phi[k + 1].block<6, 3>(0, 3 * k) += B;
    }

    const int nv = layout.total();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nv, nv);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(nv);
    H.diagonal().array() += 1e-9;

    auto add_quadratic = [&](const Eigen::VectorXd& row, double value,
                             double weight) {
      if (weight <= 0.0) return;
      H.noalias() += 2.0 * weight * (row * row.transpose());
      f.noalias() += 2.0 * weight * value * row;
    };

    const double state_weights[5] = {w.lag, w.contour, w.heading, w.speed,
                                     w.turn};
    for (int k = 1; k <= N; ++k) {
      const StepErrors se =
          evaluate_errors(nom.states[k], path_, nom.s_ref[k], v_des);
      const Eigen::Matrix<double, 5, Eigen::Dynamic> rows =
          se.grad * phi[k];  // 5 x input_vars
      const double values[5] = {se.e.lag, se.e.contour, se.e.heading_err,
                                se.e.speed_err, se.e.turn_err};
      for (int r = 0; r < 5; ++r) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(nv);
        row.head(layout.input_vars()) = rows.row(r).transpose();
        add_quadratic(row, values[r], state_weights[r]);
      }
    }

    const double dev_weights[3] = {w.v_cmd_dev, w.omega_cmd_dev, w.v_ref_dev};
    const double rate_weights[3] = {w.v_cmd_rate, w.omega_cmd_rate,
                                    w.v_ref_rate};
    for (int k = 0; k < N; ++k) {
      const double kappa_ref = path_.at(nom.s_ref[k]).curvature;
      const Eigen::Vector3d ref(v_des, kappa_ref * v_des, v_des);
      for (int j = 0; j < 3; ++j) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(nv);
        row(3 * k + j) = 1.0;
        add_quadratic(row, inputs[k](j) - ref(j), dev_weights[j]);
      }
      for (int j = 0; j < 3; ++j) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(nv);
        row(3 * k + j) = 1.0;
        double value;
        if (k == 0) {
          value = inputs[0](j) - previous_input_(j);
        } else {
          row(3 * (k - 1) + j) = -1.0;
          value = inputs[k](j) - inputs[k - 1](j);
        }
        add_quadratic(row, value, rate_weights[j]);
      }
    }

    for (int k = 1; k <= N; ++k) {
      H(layout.slack(k), layout.slack(k)) += 2.0 * w.slack_quadratic;
      f(layout.slack(k)) += w.slack_linear;
    }

    // Constraints: merged input/trust boxes, two-sided contouring with
    // slack, slack nonnegativity.
    const int m = 6 * N + 2 * N + N;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m, nv);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(m);
    int row_index = 0;
    for (int k = 0; k < N; ++k) {
      const double trust[3] = {config_.sqp.trust_speed, config_.sqp.trust_turn,
                               config_.sqp.trust_speed};
      for (int j = 0; j < 3; ++j) {
        C(row_index, 3 * k + j) = 1.0;
        d(row_index) = std::min(hi[k](j) - inputs[k](j), trust[j]);
        ++row_index;
        C(row_index, 3 * k + j) = -1.0;
        d(row_index) = std::min(inputs[k](j) - lo[k](j), trust[j]);
        ++row_index;
      }
    }
    std::vector<double> slack_start(N + 1, 0.0);
    for (int k = 1; k <= N; ++k) {
      const StepErrors se =
          evaluate_errors(nom.states[k], path_, nom.s_ref[k], v_des);
      Eigen::VectorXd contour_row = Eigen::VectorXd::Zero(nv);
      contour_row.head(layout.input_vars()) =
          (se.grad.row(1) * phi[k]).transpose();
      const double margin = chance.e_c_max - chance.r_c * contour_sigma[k];

      C.row(row_index) = contour_row;
      C(row_index, layout.slack(k)) = -1.0;
      d(row_index) = margin - se.e.contour;
      ++row_index;
      C.row(row_index) = -contour_row;
      C(row_index, layout.slack(k)) = -1.0;
      d(row_index) = margin + se.e.contour;
      ++row_index;

      slack_start[k] =
          std::max(0.0, std::abs(se.e.contour) + chance.r_c * contour_sigma[k] -
                            chance.e_c_max);
    }
    for (int k = 1; k <= N; ++k) {
      C(row_index, layout.slack(k)) = -1.0;
      d(row_index) = 0.0;
      ++row_index;
    }

    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(nv);
    for (int k = 1; k <= N; ++k) x0(layout.slack(k)) = slack_start[k] + 1e-12;

    const QpResult qp =
        solve_qp(QpProblem{H, f, C, d}, x0, config_.sqp.qp_max_iterations);
    sol.diagnostics.qp_iterations += qp.iterations;
    sol.diagnostics.kkt_residual =
        std::max(sol.diagnostics.kkt_residual, qp.kkt_residual);
    sol.diagnostics.max_violation =
        std::max(sol.diagnostics.max_violation, qp.max_violation);
    sol.diagnostics.converged = sol.diagnostics.converged && qp.converged;
    for (int k = 1; k <= N; ++k)
      sol.diagnostics.max_slack =
          std::max(sol.diagnostics.max_slack, qp.x(layout.slack(k)));

    for (int k = 0; k < N; ++k) {
      for (int j = 0; j < 3; ++j) {
        inputs[k](j) += qp.x(3 * k + j);
        inputs[k](j) = std::clamp(inputs[k](j), lo[k](j), hi[k](j));
      }
    }

    nom = rollout(initial.mean, s0, inputs, params, dt, path_.length());
    propagate_horizon(nom);
    sol.diagnostics.pass_cost.push_back(nonlinear_cost(nom));
  }

  sol.inputs.resize(N);
  sol.v_ref.resize(N);
  for (int k = 0; k < N; ++k) {
    sol.inputs[k] = ControlInput{inputs[k](0), inputs[k](1)};
    sol.v_ref[k] = inputs[k](2);
  }
  sol.states = nom.states;
  sol.s_ref = nom.s_ref;
  sol.beliefs = beliefs;
  sol.contour_std = contour_sigma;

  // Warm start: shift by one step, repeat the last input.
  warm_inputs_.assign(inputs.begin() + 1, inputs.end());
  warm_inputs_.push_back(inputs.back());
  previous_input_ = inputs.front();
  s_ref_hint_ = nom.s_ref[1];
  have_warm_start_ = true;
  return sol;
}

}  // namespace pathlearn
