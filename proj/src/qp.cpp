#include "pathlearn/qp.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace pathlearn {

QpResult solve_qp(const QpProblem& qp, const Eigen::VectorXd& x0,
                  int max_iterations, double tolerance) {
  const Eigen::Index n = qp.H.rows();
  const Eigen::Index m = qp.C.rows();
  if (qp.f.size() != n || (m > 0 && qp.C.cols() != n) || qp.d.size() != m)
    throw std::invalid_argument("inconsistent QP dimensions");

  Eigen::LLT<Eigen::MatrixXd> hllt(0.5 * (qp.H + qp.H.transpose()));
  if (hllt.info() != Eigen::Success)
    throw std::runtime_error("QP Hessian is not positive definite");

  if (m > 0 && (qp.C * x0 - qp.d).maxCoeff() > 1e-7)
    throw std::invalid_argument("QP starting point is infeasible");

  const Eigen::VectorXd h_inv_f = hllt.solve(qp.f);

  // H is fixed for the whole solve, so H^{-1} c_i is cached per constraint.
  std::vector<Eigen::VectorXd> hinv_c(static_cast<std::size_t>(m));
  std::vector<bool> cached(static_cast<std::size_t>(m), false);
  auto hinv_col = [&](int i) -> const Eigen::VectorXd& {
    if (!cached[static_cast<std::size_t>(i)]) {
      hinv_c[static_cast<std::size_t>(i)] = hllt.solve(qp.C.row(i).transpose());
      cached[static_cast<std::size_t>(i)] = true;
    }
    return hinv_c[static_cast<std::size_t>(i)];
  };

  Eigen::VectorXd x = x0;
  std::vector<int> working;
  Eigen::VectorXd lambda_ws;
  auto in_working = [&](int i) {
    return std::find(working.begin(), working.end(), i) != working.end();
  };

  QpResult result;
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    Eigen::VectorXd y;
    const int k = static_cast<int>(working.size());
    if (k == 0) {
      y = -h_inv_f;
      lambda_ws.resize(0);
    } else {
      Eigen::MatrixXd S(k, k);
      Eigen::VectorXd rhs(k);
      for (int i = 0; i < k; ++i) {
        const Eigen::VectorXd& col_i = hinv_col(working[i]);
        for (int j = 0; j <= i; ++j) {
          S(i, j) = qp.C.row(working[j]).dot(col_i);
          S(j, i) = S(i, j);
        }
        rhs(i) = -(qp.d(working[i]) + qp.C.row(working[i]).dot(h_inv_f));
      }
      S.diagonal().array() += 1e-13 * (1.0 + S.diagonal().cwiseAbs().maxCoeff());
      lambda_ws = S.ldlt().solve(rhs);
      y = -h_inv_f;
      for (int i = 0; i < k; ++i) y -= lambda_ws(i) * hinv_col(working[i]);
    }

    const Eigen::VectorXd p = y - x;
    if (p.lpNorm<Eigen::Infinity>() <= tolerance) {
      // Stationary on the working set; drop the worst multiplier if any.
      int drop = -1;
      double most_negative = -tolerance;
      for (int i = 0; i < k; ++i) {
        if (lambda_ws(i) < most_negative) {
          most_negative = lambda_ws(i);
          drop = i;
        }
      }
      if (drop < 0) {
        result.converged = true;
        break;
      }
      working.erase(working.begin() + drop);
      continue;
    }

    double alpha = 1.0;
    int blocking = -1;
    for (int i = 0; i < m; ++i) {
      if (in_working(i)) continue;
      const double cp = qp.C.row(i).dot(p);
      if (cp <= tolerance) continue;
      const double gap = qp.d(i) - qp.C.row(i).dot(x);
      const double step = gap / cp;
      if (step < alpha) {
        alpha = step;
        blocking = i;
      }
    }
    x += std::max(alpha, 0.0) * p;
    if (blocking >= 0) working.push_back(blocking);
  }

  result.x = x;
  result.iterations = iter;
  result.lambda = Eigen::VectorXd::Zero(m);
  for (std::size_t i = 0; i < working.size(); ++i) {
    if (static_cast<Eigen::Index>(i) < lambda_ws.size())
      result.lambda(working[i]) = lambda_ws(static_cast<Eigen::Index>(i));
  }
  result.active = working;

  Eigen::VectorXd stationarity = qp.H * x + qp.f;
  if (m > 0) stationarity.noalias() += qp.C.transpose() * result.lambda;
  result.kkt_residual = stationarity.lpNorm<Eigen::Infinity>();
  result.max_violation = m > 0 ? std::max(0.0, (qp.C * x - qp.d).maxCoeff()) : 0.0;
  return result;
}

}  // namespace pathlearn
