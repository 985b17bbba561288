#pragma once

#include "artic/liegroup.hpp"
#include "artic/screw.hpp"

namespace artic {

/// Single-joint object. `xi` is a normalized twist expressed in the object
/// base frame `t_wb`; the part pose is t_wb * exp(xi, theta).
struct ArticulatedObject {
  Twist xi;
  Pose t_wb;
  double theta_min = 0.0;
  double theta_max = 1.0;
  double friction = 0.0;  // breakaway resistance, N

  JointClass joint() const { return classify(xi); }
  /// Twist expressed in the world frame.
  Twist world_twist() const { return transform_twist(t_wb, xi); }
};

struct GraspContact {
  Pose offset;  // grasp pose relative to the part frame
  bool attached = false;
  double stiffness = 1000.0;  // N/m
};

struct StepResult {
  Pose achieved;                    // end-effector pose after the step
  Vector3 reaction = Vector3::Zero();  // force the object exerts on the gripper, N
  double theta = 0.0;
  bool moved = false;
};

/// Quasi-static world with a rigidly attached gripper and a spring between
/// the commanded and the constrained grasp position.
class Simulator {
 public:
  Simulator() = default;

  /// Attaches the gripper at `grasp` (world frame) with theta = 0 clamped to
  /// the range. Throws GraspOnHinge when the grasp point is within 1 mm of a
  /// rotation axis and PreconditionViolated for theta_min > theta_max.
  void reset(const ArticulatedObject& object, const Pose& grasp, double stiffness = 1000.0);

  /// Moves the grasp point towards the commanded position as far as the
  /// joint allows. The commanded orientation is ignored: the rigid grasp
  /// follows the part. Throws NotAttached.
  StepResult step(const Pose& commanded);

  void detach() { contact_.attached = false; }

  const ArticulatedObject& object() const { return object_; }
  const GraspContact& contact() const { return contact_; }
  double theta() const { return theta_; }
  Pose part_pose() const;
  Pose grasp_pose() const;
  /// (theta - theta_min) / (theta_max - theta_min); 0 for a degenerate range.
  double opening_fraction() const;
  int steps() const { return steps_; }

  /// d/dtheta of the grasp point at the current configuration (world frame).
  Vector3 grasp_velocity() const;

 private:
  Vector3 grasp_point(double theta) const;
  double closest_theta(const Vector3& target) const;

  ArticulatedObject object_;
  GraspContact contact_;
  double theta_ = 0.0;
  int steps_ = 0;
};

}  // namespace artic
