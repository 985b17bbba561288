#pragma once

#include <Eigen/Core>

namespace artic {

/// min 0.5 x^T C x + g^T x  s.t.  lb <= x <= ub,  lb_a <= A x <= ub_a.
/// Infinite bounds are ignored. Rows with lb_a == ub_a are equalities.
struct QpProblem {
  Eigen::MatrixXd cost;
  Eigen::VectorXd linear;  // may be empty (treated as zero)
  Eigen::VectorXd lb;
  Eigen::VectorXd ub;
  Eigen::MatrixXd a;  // may have zero rows
  Eigen::VectorXd lb_a;
  Eigen::VectorXd ub_a;
};

struct QpSolution {
  Eigen::VectorXd x;
  int iterations = 0;
  int active = 0;
};

/// Dual active-set solver for small dense convex problems. A merely
/// semidefinite cost is regularized with 1e-10 * max(1, max|C_ii|) * I.
/// Throws InconsistentBounds (lb > ub anywhere) or InfeasibleQp.
QpSolution solve_qp(const QpProblem& problem);

}  // namespace artic
