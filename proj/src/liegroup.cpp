#include "artic/liegroup.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <numbers>

#include "artic/error.hpp"

namespace artic {

namespace {

// Below these angles the closed-form coefficients lose precision to
// cancellation and their Taylor series are used instead.
constexpr double kSmallAngle = 1e-2;
constexpr double kSeriesAngle = 1e-1;
constexpr double kPiMargin = 1e-6;

// sin(a) / a
double coeff_a(double a) {
  if (a < kSmallAngle) {
    const double a2 = a * a;
    return 1.0 - a2 / 6.0 * (1.0 - a2 / 20.0 * (1.0 - a2 / 42.0));
  }
  return std::sin(a) / a;
}

// (1 - cos(a)) / a^2, written with the half-angle form so it stays exact.
double coeff_b(double a) {
  if (a < kSmallAngle) {
    const double a2 = a * a;
    return 0.5 - a2 / 24.0 * (1.0 - a2 / 30.0 * (1.0 - a2 / 56.0));
  }
  const double s = std::sin(0.5 * a) / a;
  return 2.0 * s * s;
}

// (a - sin(a)) / a^3
double coeff_c(double a) {
  if (a < kSeriesAngle) {
    const double a2 = a * a;
    return 1.0 / 6.0 - a2 / 120.0 + a2 * a2 / 5040.0 - a2 * a2 * a2 / 362880.0;
  }
  return (a - std::sin(a)) / (a * a * a);
}

// 1/a^2 - (1 + cos(a)) / (2 a sin(a))
double coeff_vinv(double a) {
  if (a < kSeriesAngle) {
    const double a2 = a * a;
    return 1.0 / 12.0 + a2 / 720.0 + a2 * a2 / 30240.0 + a2 * a2 * a2 / 1209600.0;
  }
  return 1.0 / (a * a) - (1.0 + std::cos(a)) / (2.0 * a * std::sin(a));
}

// (a^2 + 2 cos(a) - 2) / (2 a^4)
double coeff_q2(double a) {
  if (a < kSeriesAngle) {
    const double a2 = a * a;
    return 1.0 / 24.0 - a2 / 720.0 + a2 * a2 / 40320.0 - a2 * a2 * a2 / 3628800.0;
  }
  const double a2 = a * a;
  return (a2 + 2.0 * std::cos(a) - 2.0) / (2.0 * a2 * a2);
}

// (2a - 3 sin(a) + a cos(a)) / (2 a^5)
double coeff_q3(double a) {
  if (a < kSeriesAngle) {
    const double a2 = a * a;
    return 1.0 / 120.0 - a2 / 2520.0 + a2 * a2 / 120960.0 - a2 * a2 * a2 / 9979200.0;
  }
  const double a2 = a * a;
  return (2.0 * a - 3.0 * std::sin(a) + a * std::cos(a)) / (2.0 * a2 * a2 * a);
}

// Q block of the SE(3) left Jacobian.
Matrix3 q_block(const Vector3& rho, const Vector3& phi) {
  const double a = phi.norm();
  const Matrix3 P = hat3(phi);
  const Matrix3 R = hat3(rho);
  const Matrix3 PR = P * R;
  const Matrix3 RP = R * P;
  const Matrix3 PRP = PR * P;
  return 0.5 * R + coeff_c(a) * (PR + RP + PRP) +
         coeff_q2(a) * (P * PR + RP * P - 3.0 * PRP) +
         coeff_q3(a) * (PRP * P + P * PRP);
}

Vector6 negate(const Vector6& tau) { return -tau; }

}  // namespace

Matrix4 Pose::matrix() const {
  Matrix4 m = Matrix4::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

double Pose::angle() const {
  const double c = 0.5 * (rotation_.trace() - 1.0);
  const double s = 0.5 * vee3(rotation_ - rotation_.transpose()).norm();
  return std::atan2(s, c);
}

Pose Pose::orthonormalized() const {
  const Matrix3 drift = rotation_.transpose() * rotation_ - Matrix3::Identity();
  if (drift.norm() <= 1e-7) {
    return *this;
  }
  Eigen::JacobiSVD<Matrix3> svd(rotation_, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3 u = svd.matrixU();
  const Matrix3& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) {
    u.col(2) *= -1.0;
  }
  return {u * v.transpose(), translation_};
}

bool Pose::is_approx(const Pose& other, double tol) const {
  return (rotation_ - other.rotation_).cwiseAbs().maxCoeff() <= tol &&
         (translation_ - other.translation_).cwiseAbs().maxCoeff() <= tol;
}

Matrix3 hat3(const Vector3& w) {
  Matrix3 m;
  // clang-format off
  m <<  0.0,  -w.z(),  w.y(),
        w.z(),  0.0,  -w.x(),
       -w.y(),  w.x(),  0.0;
  // clang-format on
  return m;
}

Vector3 vee3(const Matrix3& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

Matrix4 hat6(const Twist& xi) {
  Matrix4 m = Matrix4::Zero();
  m.topLeftCorner<3, 3>() = hat3(xi.w);
  m.topRightCorner<3, 1>() = xi.v;
  return m;
}

Matrix3 expmap_so3(const Vector3& phi) {
  const double a = phi.norm();
  const Matrix3 K = hat3(phi);
  return Matrix3::Identity() + coeff_a(a) * K + coeff_b(a) * K * K;
}

Matrix3 exp_so3(const Vector3& axis, double theta) {
  if (axis.isZero(0.0)) {
    return Matrix3::Identity();
  }
  return expmap_so3(axis * theta);
}

Vector3 logmap_so3(const Matrix3& rotation) {
  const Vector3 skew = vee3(rotation - rotation.transpose());
  const double a = std::atan2(0.5 * skew.norm(), 0.5 * (rotation.trace() - 1.0));
  if (a > std::numbers::pi - kPiMargin) {
    throw Error(ErrorKind::AngleNearPi, "rotation angle " + std::to_string(a) +
                                            " is within 1e-6 of pi");
  }
  return skew / (2.0 * coeff_a(a));
}

Pose expmap(const Vector6& tau) {
  const Vector3 rho = tau.head<3>();
  const Vector3 phi = tau.tail<3>();
  const double a = phi.norm();
  const Matrix3 K = hat3(phi);
  const Matrix3 KK = K * K;
  const Matrix3 R = Matrix3::Identity() + coeff_a(a) * K + coeff_b(a) * KK;
  const Matrix3 V = Matrix3::Identity() + coeff_b(a) * K + coeff_c(a) * KK;
  return {R, V * rho};
}

Pose exp_se3(const Twist& xi, double theta) {
  if (xi.w.isZero(0.0)) {
    return Pose::from_translation(xi.v * theta);
  }
  return expmap(xi.vector() * theta);
}

Vector6 log_se3(const Pose& pose) {
  const Vector3 phi = logmap_so3(pose.rotation());
  const double a = phi.norm();
  const Matrix3 K = hat3(phi);
  const Matrix3 Vinv = Matrix3::Identity() - 0.5 * K + coeff_vinv(a) * K * K;
  Vector6 tau;
  tau << Vinv * pose.translation(), phi;
  return tau;
}

Vector6 boxminus(const Pose& a, const Pose& b) { return log_se3(b.inverse() * a); }

Pose retract(const Pose& a, const Vector6& delta) { return (a * expmap(delta)).orthonormalized(); }

Matrix6 adjoint(const Pose& pose) {
  Matrix6 ad = Matrix6::Zero();
  const Matrix3& R = pose.rotation();
  ad.topLeftCorner<3, 3>() = R;
  ad.topRightCorner<3, 3>() = hat3(pose.translation()) * R;
  ad.bottomRightCorner<3, 3>() = R;
  return ad;
}

Twist transform_twist(const Pose& pose, const Twist& xi) {
  return Twist(Vector6(adjoint(pose) * xi.vector()));
}

Matrix3 left_jacobian_so3(const Vector3& phi) {
  const double a = phi.norm();
  const Matrix3 K = hat3(phi);
  return Matrix3::Identity() + coeff_b(a) * K + coeff_c(a) * K * K;
}

Matrix3 left_jacobian_so3_inverse(const Vector3& phi) {
  const double a = phi.norm();
  const Matrix3 K = hat3(phi);
  return Matrix3::Identity() - 0.5 * K + coeff_vinv(a) * K * K;
}

Matrix6 left_jacobian(const Vector6& tau) {
  const Vector3 rho = tau.head<3>();
  const Vector3 phi = tau.tail<3>();
  const Matrix3 J = left_jacobian_so3(phi);
  Matrix6 out = Matrix6::Zero();
  out.topLeftCorner<3, 3>() = J;
  out.topRightCorner<3, 3>() = q_block(rho, phi);
  out.bottomRightCorner<3, 3>() = J;
  return out;
}

Matrix6 left_jacobian_inverse(const Vector6& tau) {
  const Vector3 rho = tau.head<3>();
  const Vector3 phi = tau.tail<3>();
  const Matrix3 Jinv = left_jacobian_so3_inverse(phi);
  Matrix6 out = Matrix6::Zero();
  out.topLeftCorner<3, 3>() = Jinv;
  out.topRightCorner<3, 3>() = -Jinv * q_block(rho, phi) * Jinv;
  out.bottomRightCorner<3, 3>() = Jinv;
  return out;
}

Matrix6 right_jacobian(const Vector6& tau) { return left_jacobian(negate(tau)); }

Matrix6 right_jacobian_inverse(const Vector6& tau) { return left_jacobian_inverse(negate(tau)); }

}  // namespace artic
