#pragma once

#include <Eigen/Dense>
#include <vector>

namespace pathlearn {

/// Strictly convex inequality-constrained QP:
///   minimize 1/2 x^T H x + f^T x   subject to  C x <= d.
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::MatrixXd C;
  Eigen::VectorXd d;
};

struct QpResult {
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;      // per-constraint multipliers, 0 when inactive
  std::vector<int> active;     // final working set
  int iterations = 0;
  double kkt_residual = 0.0;   // stationarity infinity-norm
  double max_violation = 0.0;  // primal feasibility residual
  bool converged = false;
};

/// Primal active-set method for dense problems with an SPD Hessian. The
/// starting point must satisfy C x0 <= d (within tolerance); the caller
/// constructs one from slack-augmented constraints.
QpResult solve_qp(const QpProblem& qp, const Eigen::VectorXd& x0,
                  int max_iterations = 1000, double tolerance = 1e-9);

}  // namespace pathlearn
