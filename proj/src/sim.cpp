#include "artic/sim.hpp"

#include <algorithm>
#include <cmath>

#include "artic/error.hpp"

namespace artic {

void Simulator::reset(const ArticulatedObject& object, const Pose& grasp, double stiffness) {
  if (object.theta_min > object.theta_max) {
    throw Error(ErrorKind::PreconditionViolated, "joint range has theta_min > theta_max");
  }
  if (!(stiffness > 0.0)) {
    throw Error(ErrorKind::PreconditionViolated, "grasp stiffness must be positive");
  }
  const Twist w = object.world_twist();
  if (w.w.norm() > 1e-12) {
    // closest point of the axis to the origin for a twist with unit w
    const Vector3 axis = w.w.normalized();
    const Vector3 on_axis = w.w.cross(w.v) / w.w.squaredNorm();
    const Vector3 d = grasp.translation() - on_axis;
    if ((d - axis * axis.dot(d)).norm() < 1e-3) {
      throw Error(ErrorKind::GraspOnHinge, "grasp point lies within 1 mm of the rotation axis");
    }
  }
  object_ = object;
  theta_ = std::clamp(0.0, object.theta_min, object.theta_max);
  contact_.attached = true;
  contact_.stiffness = stiffness;
  contact_.offset = part_pose().inverse() * grasp;
  steps_ = 0;
}

Pose Simulator::part_pose() const { return object_.t_wb * exp_se3(object_.xi, theta_); }

Pose Simulator::grasp_pose() const { return part_pose() * contact_.offset; }

double Simulator::opening_fraction() const {
  const double range = object_.theta_max - object_.theta_min;
  if (range <= 0.0) {
    return 0.0;
  }
  return (theta_ - object_.theta_min) / range;
}

Vector3 Simulator::grasp_point(double theta) const {
  return (object_.t_wb * exp_se3(object_.xi, theta) * contact_.offset).translation();
}

Vector3 Simulator::grasp_velocity() const {
  return point_velocity(object_.world_twist(), grasp_point(theta_));
}

double Simulator::closest_theta(const Vector3& target) const {
  // Newton on f(theta) = 0.5 |p(theta) - target|^2, seeded by the linear step.
  const Twist w = object_.world_twist();
  const Vector3 p0 = grasp_point(theta_);
  const Vector3 d0 = point_velocity(w, p0);
  double theta = theta_ + (target - p0).dot(d0) / d0.squaredNorm();
  for (int it = 0; it < 30; ++it) {
    const Vector3 p = grasp_point(theta);
    const Vector3 dp = point_velocity(w, p);
    const Vector3 ddp = w.w.cross(dp);
    const Vector3 e = p - target;
    const double g = e.dot(dp);
    double h = dp.squaredNorm() + e.dot(ddp);
    if (h <= 0.5 * dp.squaredNorm()) {
      h = dp.squaredNorm();
    }
    const double delta = g / h;
    theta -= delta;
    if (std::abs(delta) < 1e-15 * std::max(1.0, std::abs(theta))) {
      break;
    }
  }
  return theta;
}

StepResult Simulator::step(const Pose& commanded) {
  if (!contact_.attached) {
    throw Error(ErrorKind::NotAttached, "gripper is not attached to the object");
  }
  ++steps_;
  const Vector3 current = grasp_point(theta_);
  const Vector3 target = commanded.translation();
  const Vector3 delta = target - current;
  const Vector3 d = point_velocity(object_.world_twist(), current);

  StepResult out;
  const double along = d.norm() > 0.0 ? delta.dot(d) / d.norm() : 0.0;
  if (contact_.stiffness * std::abs(along) > object_.friction &&
      object_.theta_max > object_.theta_min) {
    const double next = std::clamp(closest_theta(target), object_.theta_min, object_.theta_max);
    out.moved = next != theta_;
    theta_ = next;
  }
  out.theta = theta_;
  out.achieved = grasp_pose();
  out.reaction = -contact_.stiffness * (target - out.achieved.translation());
  return out;
}

}  // namespace artic
