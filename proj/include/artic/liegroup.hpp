#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace artic {

using Vector3 = Eigen::Vector3d;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix3 = Eigen::Matrix3d;
using Matrix4 = Eigen::Matrix4d;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

/// Element of se(3) ordered as (v, w): linear part first, angular second.
/// The same layout is used for tangent vectors (rho, phi) produced by log_se3.
struct Twist {
  Vector3 v = Vector3::Zero();
  Vector3 w = Vector3::Zero();

  Twist() = default;
  Twist(const Vector3& linear, const Vector3& angular) : v(linear), w(angular) {}
  explicit Twist(const Vector6& xi) : v(xi.head<3>()), w(xi.tail<3>()) {}

  Vector6 vector() const {
    Vector6 out;
    out << v, w;
    return out;
  }

  Twist operator*(double s) const { return {v * s, w * s}; }
  Twist operator+(const Twist& o) const { return {v + o.v, w + o.w}; }
  Twist operator-(const Twist& o) const { return {v - o.v, w - o.w}; }
  Twist operator-() const { return {-v, -w}; }
};

/// Rigid transform in SE(3). The rotation block is stored as a matrix.
class Pose {
 public:
  Pose() : rotation_(Matrix3::Identity()), translation_(Vector3::Zero()) {}
  Pose(const Matrix3& rotation, const Vector3& translation)
      : rotation_(rotation), translation_(translation) {}

  static Pose identity() { return {}; }
  static Pose from_translation(const Vector3& t) { return {Matrix3::Identity(), t}; }
  static Pose from_rotation(const Matrix3& r) { return {r, Vector3::Zero()}; }
  static Pose from_matrix(const Matrix4& m) {
    return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
  }

  const Matrix3& rotation() const { return rotation_; }
  const Vector3& translation() const { return translation_; }

  Matrix4 matrix() const;
  Pose inverse() const { return {rotation_.transpose(), -rotation_.transpose() * translation_}; }

  Pose operator*(const Pose& other) const {
    return {rotation_ * other.rotation_, rotation_ * other.translation_ + translation_};
  }
  Vector3 operator*(const Vector3& point) const { return rotation_ * point + translation_; }

  /// Rotation angle of the rotation block in [0, pi].
  double angle() const;

  /// Polar-decomposition projection of the rotation back onto SO(3) when
  /// ||R^T R - I|| exceeds 1e-7. Identity otherwise.
  Pose orthonormalized() const;

  bool is_approx(const Pose& other, double tol = 1e-9) const;

 private:
  Matrix3 rotation_;
  Vector3 translation_;
};

/// Skew-symmetric matrix with hat3(w) * x == w.cross(x).
Matrix3 hat3(const Vector3& w);
Vector3 vee3(const Matrix3& m);

/// 4x4 se(3) matrix of a twist.
Matrix4 hat6(const Twist& xi);

/// Rodrigues formula for a unit axis (or zero axis, giving identity).
Matrix3 exp_so3(const Vector3& axis, double theta);

/// Rotation exp for an arbitrary rotation vector phi = axis * angle.
Matrix3 expmap_so3(const Vector3& phi);

/// Rotation vector of R. Throws AngleNearPi within 1e-6 of pi.
Vector3 logmap_so3(const Matrix3& rotation);

/// exp(hat(xi) * theta). A zero angular part is a pure translation v * theta.
/// The angular part need not be unit length; the result is the group
/// exponential of the scaled twist in every case.
Pose exp_se3(const Twist& xi, double theta);

/// Group exponential of a tangent vector tau = (rho, phi).
Pose expmap(const Vector6& tau);

/// Inverse of expmap. Throws AngleNearPi for rotations within 1e-6 of pi.
Vector6 log_se3(const Pose& pose);

/// log(b^-1 * a). Zero iff a == b.
Vector6 boxminus(const Pose& a, const Pose& b);

/// a * exp(delta): right-perturbation retraction used for pose variables.
Pose retract(const Pose& a, const Vector6& delta);

/// Adjoint of a pose acting on (v, w) ordered twists.
Matrix6 adjoint(const Pose& pose);

/// Re-express a twist given in frame B in frame A, where pose = T_AB.
Twist transform_twist(const Pose& pose, const Twist& xi);

/// SO(3) left Jacobian and its inverse.
Matrix3 left_jacobian_so3(const Vector3& phi);
Matrix3 left_jacobian_so3_inverse(const Vector3& phi);

/// SE(3) left/right Jacobians for tau = (rho, phi):
/// exp(tau + d) ~= exp(J_l d) exp(tau) ~= exp(tau) exp(J_r d).
Matrix6 left_jacobian(const Vector6& tau);
Matrix6 left_jacobian_inverse(const Vector6& tau);
Matrix6 right_jacobian(const Vector6& tau);
Matrix6 right_jacobian_inverse(const Vector6& tau);

}  // namespace artic
