#include "artic/motion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "artic/error.hpp"
#include "artic/qp.hpp"

namespace artic {

double advance(OpeningSchedule& s) {
  s.theta += s.sign * s.gv * s.dt;
  if (s.theta >= s.upper) {
    s.theta = s.upper;
    s.sign = -1.0;
  } else if (s.theta <= s.lower) {
    s.theta = s.lower;
    s.sign = 1.0;
  }
  return s.theta;
}

Pose goal_pose(const Twist& xi, double theta_goal, const Pose& t_wb) {
  if (theta_goal == 0.0) {
    return t_wb;
  }
  return t_wb * exp_se3(xi, theta_goal);
}

Pose ChainModel::forward(const Eigen::VectorXd& q) const {
  if (q.size() != joints()) {
    throw Error(ErrorKind::PreconditionViolated, "configuration size does not match the chain");
  }
  Pose t = base;
  for (int i = 0; i < joints(); ++i) {
    t = t * Pose::from_translation(offsets[static_cast<std::size_t>(i)]) *
        Pose::from_rotation(exp_so3(axes[static_cast<std::size_t>(i)], q[i]));
  }
  return t * tool;
}

Eigen::MatrixXd ChainModel::jacobian(const Eigen::VectorXd& q) const {
  const int n = joints();
  std::vector<Vector3> origins(static_cast<std::size_t>(n));
  std::vector<Vector3> world_axes(static_cast<std::size_t>(n));
  Pose t = base;
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    t = t * Pose::from_translation(offsets[k]);
    origins[k] = t.translation();
    world_axes[k] = t.rotation() * axes[k].normalized();
    t = t * Pose::from_rotation(exp_so3(axes[k], q[i]));
  }
  const Vector3 p = (t * tool).translation();
  Eigen::MatrixXd j(6, n);
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    j.block<3, 1>(0, i) = world_axes[k].cross(p - origins[k]);
    j.block<3, 1>(3, i) = world_axes[k];
  }
  return j;
}

ChainModel default_chain(const Pose& base) {
  ChainModel c;
  c.base = base;
  for (int i = 0; i < 7; ++i) {
    c.axes.push_back(i % 2 == 0 ? Vector3::UnitZ() : Vector3::UnitY());
    c.offsets.push_back(i == 0 ? Vector3::Zero() : Vector3(0, 0, 0.25));
  }
  c.tool = Pose::from_translation({0, 0, 0.25});
  const double lim = 170.0 * std::numbers::pi / 180.0;
  c.lower = Eigen::VectorXd::Constant(7, -lim);
  c.upper = Eigen::VectorXd::Constant(7, lim);
  c.velocity_lower = Eigen::VectorXd::Constant(7, -2.0);
  c.velocity_upper = Eigen::VectorXd::Constant(7, 2.0);
  return c;
}

namespace {

// position (3) and row-major rotation entries (9)
Eigen::Matrix<double, 12, 1> task_error(const Pose& current, const Pose& target) {
  Eigen::Matrix<double, 12, 1> e;
  e.head<3>() = current.translation() - target.translation();
  const Matrix3 dr = current.rotation() - target.rotation();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      e[3 + 3 * r + c] = dr(r, c);
    }
  }
  return e;
}

Eigen::MatrixXd task_jacobian(const ChainModel& chain, const Eigen::VectorXd& q) {
  const Eigen::MatrixXd j = chain.jacobian(q);
  const Matrix3 rot = chain.forward(q).rotation();
  Eigen::MatrixXd out(12, chain.joints());
  for (int i = 0; i < chain.joints(); ++i) {
    out.block<3, 1>(0, i) = j.block<3, 1>(0, i);
    const Matrix3 d = hat3(j.block<3, 1>(3, i)) * rot;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        out(3 + 3 * r + c, i) = d(r, c);
      }
    }
  }
  return out;
}

}  // namespace

IkResult solve_ik(const ChainModel& chain, const Eigen::VectorXd& q0, const Pose& target,
                  const IkParams& params) {
  const int n = chain.joints();
  if (q0.size() != n || chain.lower.size() != n || chain.upper.size() != n ||
      chain.velocity_lower.size() != n || chain.velocity_upper.size() != n) {
    throw Error(ErrorKind::PreconditionViolated, "chain bounds do not match the joint count");
  }
  IkResult res;
  res.q = q0.cwiseMax(chain.lower).cwiseMin(chain.upper);
  const auto measure = [&] {
    const Eigen::Matrix<double, 12, 1> e = task_error(chain.forward(res.q), target);
    res.position_error = e.head<3>().norm();
    res.rotation_error = e.tail<9>().norm();
    res.converged = res.position_error < params.tolerance && res.rotation_error < params.tolerance;
    return e;
  };

  Eigen::Matrix<double, 12, 1> e = measure();
  const int m = n + 12;
  QpProblem qp;
  qp.cost = Eigen::MatrixXd::Zero(m, m);
  qp.cost.diagonal().head(n).setConstant(params.velocity_weight);
  qp.cost.diagonal().tail(12).setConstant(params.slack_weight);
  qp.lb = Eigen::VectorXd::Constant(m, -std::numeric_limits<double>::infinity());
  qp.ub = Eigen::VectorXd::Constant(m, std::numeric_limits<double>::infinity());
  qp.a = Eigen::MatrixXd::Zero(12, m);
  qp.a.rightCols(12).setIdentity();

  while (!res.converged && res.iterations < params.max_iterations) {
    ++res.iterations;
    qp.a.leftCols(n) = task_jacobian(chain, res.q) * params.dt;
    qp.lb_a = -e;
    qp.ub_a = -e;
    for (int i = 0; i < n; ++i) {
      qp.lb[i] = std::max(chain.velocity_lower[i], (chain.lower[i] - res.q[i]) / params.dt);
      qp.ub[i] = std::min(chain.velocity_upper[i], (chain.upper[i] - res.q[i]) / params.dt);
      qp.lb[i] = std::min(qp.lb[i], qp.ub[i]);
    }
    const QpSolution s = solve_qp(qp);
    res.q = (res.q + s.x.head(n) * params.dt).cwiseMax(chain.lower).cwiseMin(chain.upper);
    e = measure();
  }
  return res;
}

}  // namespace artic
