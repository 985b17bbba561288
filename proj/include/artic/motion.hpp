#pragma once

#include <vector>

#include <Eigen/Core>

#include "artic/liegroup.hpp"

namespace artic {

/// Incremental articulation goal: theta += sign * gv * dt, bouncing between
/// the bounds.
struct OpeningSchedule {
  double gv = 0.1;  // theta units per second
  double dt = 0.1;  // s
  double theta = 0.0;
  double lower = 0.0;
  double upper = 1.0;
  double sign = 1.0;
};

/// Advances the goal by one control period and returns it. The direction is
/// inverted when a bound is reached.
double advance(OpeningSchedule& schedule);

/// t_wb * exp(xi, theta_goal).
Pose goal_pose(const Twist& xi, double theta_goal, const Pose& t_wb);

// ---------------------------------------------------------------------------
// Serial chain and IK
// ---------------------------------------------------------------------------

/// Revolute serial chain. Joint i rotates about `axes[i]` (in the frame of
/// link i-1 after `offsets[i]`); the end effector sits at `tool` after the
/// last joint.
struct ChainModel {
  Pose base;
  std::vector<Vector3> axes;
  std::vector<Vector3> offsets;
  Pose tool;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd velocity_lower;
  Eigen::VectorXd velocity_upper;

  int joints() const { return static_cast<int>(axes.size()); }
  Pose forward(const Eigen::VectorXd& q) const;
  /// 6 x n geometric Jacobian, rows (linear, angular) in the world frame.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& q) const;
};

/// 7 joints with alternating z/y axes and 0.25 m links, +-170 deg limits and
/// 2 rad/s velocity limits.
ChainModel default_chain(const Pose& base = Pose::identity());

struct IkParams {
  double dt = 0.1;
  double velocity_weight = 1.0;
  double slack_weight = 1e4;
  double tolerance = 1e-6;
  int max_iterations = 50;
};

struct IkResult {
  Eigen::VectorXd q;
  int iterations = 0;
  double position_error = 0.0;  // |p(q) - p_target|
  double rotation_error = 0.0;  // |R(q) - R_target|_F
  bool converged = false;
};

/// Sequential QP: per iteration minimizes w_q |qdot|^2 + w_s |s|^2 subject
/// to the linearized position and rotation-matrix constraints with slacks s
/// and to joint position/velocity bounds. The result always satisfies the
/// joint bounds; `converged` is false when the tolerance was not reached.
IkResult solve_ik(const ChainModel& chain, const Eigen::VectorXd& q0, const Pose& target,
                  const IkParams& params = {});

}  // namespace artic
