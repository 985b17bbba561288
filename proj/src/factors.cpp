#include "artic/factors.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "artic/error.hpp"

namespace artic {

namespace {

struct ForceTarget {
  Vector3 direction_scaled;  // v_rot
  Matrix3 jacobian;          // d v_rot / d v_est
};

Vector3 fallback_in_plane(const Vector3& n) {
  const Vector3 basis[3] = {Vector3::UnitX(), Vector3::UnitY(), Vector3::UnitZ()};
  Vector3 e = basis[2];
  for (const Vector3& candidate : basis) {
    if (std::abs(n.dot(candidate)) < 0.9) {
      e = candidate;
      break;
    }
  }
  const Vector3 t_hat = n.cross(e).normalized();
  return t_hat.cross(n).normalized();
}

ForceTarget compute_force_target(const Vector3& v_est, const Vector3& force) {
  const double fn = force.norm();
  if (fn <= 1e-9) {
    throw Error(ErrorKind::DegenerateForce, "reaction force norm is below 1e-9");
  }
  const Vector3 n = force / fn;
  const double speed = v_est.norm();
  if (speed < 1e-12) {
    return {Vector3::Zero(), Matrix3::Zero()};
  }
  const Vector3 v_hat = v_est / speed;
  if (v_est.cross(n).norm() < 1e-9 * speed) {
    const Vector3 dir = fallback_in_plane(n);
    return {speed * dir, dir * v_hat.transpose()};
  }
  const Matrix3 projector = Matrix3::Identity() - n * n.transpose();
  const Vector3 u = projector * v_est;
  const double un = u.norm();
  const Vector3 u_hat = u / un;
  const Matrix3 jac = u_hat * v_hat.transpose() +
                      (speed / un) * (Matrix3::Identity() - u_hat * u_hat.transpose()) * projector;
  return {speed * u_hat, jac};
}

// d(point_velocity)/d(xi) for the (v, w) ordering.
Eigen::Matrix<double, 3, 6> point_velocity_jacobian(const Vector3& c) {
  Eigen::Matrix<double, 3, 6> j;
  j << Matrix3::Identity(), -hat3(c);
  return j;
}

}  // namespace

int VariableKey::dim() const {
  switch (kind) {
    case VariableKind::Xi: return 6;
    case VariableKind::Theta: return 1;
    case VariableKind::PoseA:
    case VariableKind::PoseB: return 6;
  }
  return 0;
}

bool Values::contains(const VariableKey& key) const {
  const auto in_range = [&](std::size_t n) { return key.index >= 0 && static_cast<std::size_t>(key.index) < n; };
  switch (key.kind) {
    case VariableKind::Xi: return key.index == 0;
    case VariableKind::Theta: return in_range(theta.size());
    case VariableKind::PoseA: return in_range(pose_a.size());
    case VariableKind::PoseB: return in_range(pose_b.size());
  }
  return false;
}

void Values::retract(const VariableKey& key, const Eigen::Ref<const Eigen::VectorXd>& delta) {
  switch (key.kind) {
    case VariableKind::Xi:
      xi = Twist(Vector6(xi.vector() + delta.head<6>()));
      break;
    case VariableKind::Theta:
      theta[key.index] += delta(0);
      break;
    case VariableKind::PoseA:
      pose_a[key.index] = artic::retract(pose_a[key.index], delta.head<6>());
      break;
    case VariableKind::PoseB:
      pose_b[key.index] = artic::retract(pose_b[key.index], delta.head<6>());
      break;
  }
}

NoiseModel NoiseModel::isotropic(int dim, double sigma) {
  return NoiseModel(Eigen::MatrixXd::Identity(dim, dim) / sigma);
}

NoiseModel NoiseModel::from_variances(const Eigen::VectorXd& variances) {
  if ((variances.array() <= 0.0).any()) {
    throw Error(ErrorKind::PreconditionViolated, "noise variances must be positive");
  }
  return NoiseModel(variances.cwiseSqrt().cwiseInverse().asDiagonal());
}

NoiseModel NoiseModel::from_covariance(const Eigen::MatrixXd& covariance) {
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success || !covariance.isApprox(covariance.transpose())) {
    throw Error(ErrorKind::PreconditionViolated, "covariance is not symmetric positive definite");
  }
  const Eigen::MatrixXd lower = llt.matrixL();
  return NoiseModel(lower.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(covariance.rows(), covariance.cols())));
}

Eigen::MatrixXd NoiseModel::covariance() const {
  const Eigen::MatrixXd info = whitener_.transpose() * whitener_;
  return info.inverse();
}

Eigen::Vector3d variances_from_log_sigma(const Vector3& log_sigma) {
  return (2.0 * log_sigma.array()).exp();
}

// ---------------------------------------------------------------------------

Eigen::Matrix<double, 7, 1> prior_residual(const ArticulationState& x0,
                                           const ArticulationState& prior) {
  Eigen::Matrix<double, 7, 1> r;
  r << x0.xi.vector() - prior.xi.vector(), x0.theta - prior.theta;
  return r;
}

Vector3 affordance_residual(const Twist& xi, const Vector3& p, const Vector3& f_hat) {
  return exp_se3(xi, kAffordanceIncrement) * p - f_hat - p;
}

Vector3 force_plane_target(const Vector3& v_est, const Vector3& force) {
  return compute_force_target(v_est, force).direction_scaled;
}

Vector3 force_plane_residual(const Twist& xi, const ForceMeasurement& m) {
  const Vector3 v_est = point_velocity(xi, m.point);
  return v_est - force_plane_target(v_est, m.force);
}

Vector6 kinematic_residual(const Pose& t_var, const Pose& t_meas) { return boxminus(t_var, t_meas); }

Vector6 articulation_residual(const Twist& xi, double theta_k, const Pose& t_a, const Pose& t_b) {
  return boxminus(exp_se3(xi, theta_k), t_b.inverse() * t_a);
}

std::string_view to_string(FactorType type) {
  switch (type) {
    case FactorType::Prior: return "prior";
    case FactorType::Affordance: return "affordance";
    case FactorType::Force: return "force";
    case FactorType::Kinematic: return "kinematic";
    case FactorType::Articulation: return "articulation";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

Linearization Factor::linearize(const Values& values) const {
  Linearization lin;
  lin.residual = noise_.whiten(residual(values));
  lin.jacobians = jacobians(values);
  for (auto& j : lin.jacobians) {
    j = noise_.whiten(j);
  }
  return lin;
}

double Factor::cost(const Values& values) const {
  return noise_.whiten(residual(values)).squaredNorm();
}

PriorFactor::PriorFactor(ArticulationState prior, NoiseModel noise)
    : Factor({VariableKey::xi(), VariableKey::theta(0)}, std::move(noise)), prior_(prior) {}

Eigen::VectorXd PriorFactor::residual(const Values& values) const {
  return prior_residual({values.xi, values.theta.at(0)}, prior_);
}

std::vector<Eigen::MatrixXd> PriorFactor::jacobians(const Values&) const {
  Eigen::MatrixXd j_xi = Eigen::MatrixXd::Zero(7, 6);
  j_xi.topRows<6>().setIdentity();
  Eigen::MatrixXd j_theta = Eigen::MatrixXd::Zero(7, 1);
  j_theta(6, 0) = 1.0;
  return {j_xi, j_theta};
}

AffordanceFactor::AffordanceFactor(Vector3 point, Vector3 flow, NoiseModel noise)
    : Factor({VariableKey::xi()}, std::move(noise)), point_(point), flow_(flow) {}

Eigen::VectorXd AffordanceFactor::residual(const Values& values) const {
  return affordance_residual(values.xi, point_, flow_);
}

std::vector<Eigen::MatrixXd> AffordanceFactor::jacobians(const Values& values) const {
  // exp(tau + d) p ~= exp(J_l d) q,  q = exp(tau) p
  const Vector6 tau = values.xi.vector() * kAffordanceIncrement;
  const Vector3 q = expmap(tau) * point_;
  Eigen::Matrix<double, 3, 6> dq;
  dq << Matrix3::Identity(), -hat3(q);
  return {Eigen::MatrixXd(dq * left_jacobian(tau) * kAffordanceIncrement)};
}

ForceFactor::ForceFactor(ForceMeasurement measurement, NoiseModel noise)
    : Factor({VariableKey::xi()}, std::move(noise)), measurement_(measurement) {
  if (measurement_.force.norm() <= 1e-9) {
    throw Error(ErrorKind::DegenerateForce, "reaction force norm is below 1e-9");
  }
}

Eigen::VectorXd ForceFactor::residual(const Values& values) const {
  return force_plane_residual(values.xi, measurement_);
}

std::vector<Eigen::MatrixXd> ForceFactor::jacobians(const Values& values) const {
  const Vector3 v_est = point_velocity(values.xi, measurement_.point);
  const ForceTarget target = compute_force_target(v_est, measurement_.force);
  return {Eigen::MatrixXd((Matrix3::Identity() - target.jacobian) *
                          point_velocity_jacobian(measurement_.point))};
}

KinematicFactor::KinematicFactor(VariableKey key, Pose measured, NoiseModel noise)
    : Factor({key}, std::move(noise)), measured_(measured) {
  if (key.kind != VariableKind::PoseA && key.kind != VariableKind::PoseB) {
    throw Error(ErrorKind::PreconditionViolated, "kinematic factor needs a pose variable");
  }
}

Eigen::VectorXd KinematicFactor::residual(const Values& values) const {
  const VariableKey key = keys().front();
  const Pose& t = key.kind == VariableKind::PoseA ? values.pose_a.at(key.index)
                                                  : values.pose_b.at(key.index);
  return kinematic_residual(t, measured_);
}

std::vector<Eigen::MatrixXd> KinematicFactor::jacobians(const Values& values) const {
  const Vector6 r = residual(values);
  return {Eigen::MatrixXd(right_jacobian_inverse(r))};
}

ArticulationFactor::ArticulationFactor(int k, NoiseModel noise)
    : Factor({VariableKey::xi(), VariableKey::theta(k), VariableKey::pose_a(k),
              VariableKey::pose_b(k)},
             std::move(noise)) {}

Eigen::VectorXd ArticulationFactor::residual(const Values& values) const {
  const int k = keys()[1].index;
  return articulation_residual(values.xi, values.theta.at(k), values.pose_a.at(k),
                               values.pose_b.at(k));
}

std::vector<Eigen::MatrixXd> ArticulationFactor::jacobians(const Values& values) const {
  // r = log(X), X = T_A^-1 T_B E, E = exp(xi theta).
  const int k = keys()[1].index;
  const double theta = values.theta.at(k);
  const Pose& t_a = values.pose_a.at(k);
  const Pose& t_b = values.pose_b.at(k);
  const Vector6 tau = values.xi.vector() * theta;
  const Pose e = expmap(tau);
  const Pose x = t_a.inverse() * t_b * e;
  const Vector6 r = log_se3(x);
  const Matrix6 jr_inv = right_jacobian_inverse(r);

  const Matrix6 d_xi = jr_inv * right_jacobian(tau) * theta;
  const Eigen::Matrix<double, 6, 1> d_theta = jr_inv * values.xi.vector();
  const Matrix6 d_a = -jr_inv * adjoint(x.inverse());
  const Matrix6 d_b = jr_inv * adjoint(e.inverse());
  return {Eigen::MatrixXd(d_xi), Eigen::MatrixXd(d_theta), Eigen::MatrixXd(d_a),
          Eigen::MatrixXd(d_b)};
}

}  // namespace artic
