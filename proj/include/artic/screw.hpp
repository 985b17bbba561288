#pragma once

#include <span>
#include <string_view>

#include "artic/liegroup.hpp"

namespace artic {

enum class JointClass { Revolute, Prismatic, Helical };

std::string_view to_string(JointClass cls);

/// Relative angular norm below which a twist is treated as prismatic.
inline constexpr double kPrismaticRatio = 0.01;
/// Pitch (m/rad) above which a unit-axis twist is reported as helical.
inline constexpr double kHelicalPitch = 0.01;

struct ArticulationState {
  Twist xi;
  double theta = 0.0;
};

struct NormalizedTwist {
  Twist xi;
  double scale = 1.0;
  JointClass joint = JointClass::Revolute;
};

/// Resolves the xi/theta scale ambiguity: unit angular part for
/// revolute/helical twists, unit linear part (and zero angular) for prismatic.
/// exp_se3(result.xi, result.scale * theta) == exp_se3(xi, theta) up to the
/// zeroed angular part. Throws DegenerateTwist when both parts vanish.
NormalizedTwist normalize(const Twist& xi);

JointClass classify(const Twist& xi);

/// v + w x c: instantaneous velocity of point c under the twist.
Vector3 point_velocity(const Twist& xi, const Vector3& c);

/// Mean cosine between paired velocity directions. Throws ZeroVector for
/// any zero-length entry and PreconditionViolated on a length mismatch.
double tangent_similarity(std::span<const Vector3> v_gt, std::span<const Vector3> v_est);

}  // namespace artic
