#pragma once

#include <compare>
#include <memory>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "artic/liegroup.hpp"
#include "artic/screw.hpp"

namespace artic {

/// Articulation increment that every flow vector corresponds to. The oracle
/// generates flow with the same value.
inline constexpr double kAffordanceIncrement = 0.05;

// ---------------------------------------------------------------------------
// Variables
// ---------------------------------------------------------------------------

enum class VariableKind { Xi, Theta, PoseA, PoseB };

struct VariableKey {
  VariableKind kind = VariableKind::Xi;
  int index = 0;

  static VariableKey xi() { return {VariableKind::Xi, 0}; }
  static VariableKey theta(int k) { return {VariableKind::Theta, k}; }
  static VariableKey pose_a(int k) { return {VariableKind::PoseA, k}; }
  static VariableKey pose_b(int k) { return {VariableKind::PoseB, k}; }

  int dim() const;

  auto operator<=>(const VariableKey&) const = default;
};

/// Current value of every variable. Pose variables are updated by right
/// perturbation T * exp(delta); xi and theta are Euclidean.
struct Values {
  Twist xi;
  std::vector<double> theta;
  std::vector<Pose> pose_a;
  std::vector<Pose> pose_b;

  bool contains(const VariableKey& key) const;
  void retract(const VariableKey& key, const Eigen::Ref<const Eigen::VectorXd>& delta);
};

// ---------------------------------------------------------------------------
// Noise
// ---------------------------------------------------------------------------

/// Gaussian noise with whitening W, W^T W = Sigma^-1. Diagonal models use
/// W = Sigma^-1/2 directly; dense models use the inverse Cholesky factor.
class NoiseModel {
 public:
  static NoiseModel isotropic(int dim, double sigma);
  static NoiseModel from_variances(const Eigen::VectorXd& variances);
  static NoiseModel from_covariance(const Eigen::MatrixXd& covariance);

  int dim() const { return static_cast<int>(whitener_.rows()); }
  const Eigen::MatrixXd& whitener() const { return whitener_; }
  Eigen::MatrixXd covariance() const;

  Eigen::VectorXd whiten(const Eigen::VectorXd& r) const { return whitener_ * r; }
  Eigen::MatrixXd whiten(const Eigen::MatrixXd& j) const { return whitener_ * j; }

 private:
  explicit NoiseModel(Eigen::MatrixXd whitener) : whitener_(std::move(whitener)) {}
  Eigen::MatrixXd whitener_;
};

/// Covariance diag(e^{2u_x}, e^{2u_y}, e^{2u_z}) from predicted log-sigmas.
Eigen::Vector3d variances_from_log_sigma(const Vector3& log_sigma);

// ---------------------------------------------------------------------------
// Residual functions
// ---------------------------------------------------------------------------

struct ForceMeasurement {
  Vector3 force = Vector3::Zero();  // measured reaction force, N
  Vector3 point = Vector3::Zero();  // grasp point, same frame as the twist
  int index = 0;
};

Eigen::Matrix<double, 7, 1> prior_residual(const ArticulationState& x0,
                                           const ArticulationState& prior);

/// exp(xi * 0.05) p - f_hat - p.
Vector3 affordance_residual(const Twist& xi, const Vector3& p, const Vector3& f_hat);

/// Target direction for the force-plane residual: v_est projected onto the
/// plane with normal F, rescaled to |v_est|. Falls back to a basis-derived
/// in-plane direction when v_est is (anti-)parallel to F.
Vector3 force_plane_target(const Vector3& v_est, const Vector3& force);

/// v_est - v_rot with v_est = point_velocity(xi, m.point).
/// Throws DegenerateForce when |F| <= 1e-9.
Vector3 force_plane_residual(const Twist& xi, const ForceMeasurement& m);

/// boxminus(T_var, T_meas).
Vector6 kinematic_residual(const Pose& t_var, const Pose& t_meas);

/// boxminus(exp(xi theta_k), T_B^-1 T_A).
Vector6 articulation_residual(const Twist& xi, double theta_k, const Pose& t_a, const Pose& t_b);

// ---------------------------------------------------------------------------
// Factors
// ---------------------------------------------------------------------------

enum class FactorType { Prior, Affordance, Force, Kinematic, Articulation };

std::string_view to_string(FactorType type);

/// Whitened residual with one whitened Jacobian block per key.
struct Linearization {
  Eigen::VectorXd residual;
  std::vector<Eigen::MatrixXd> jacobians;
};

class Factor {
 public:
  Factor(std::vector<VariableKey> keys, NoiseModel noise)
      : keys_(std::move(keys)), noise_(std::move(noise)) {}
  virtual ~Factor() = default;

  const std::vector<VariableKey>& keys() const { return keys_; }
  const NoiseModel& noise() const { return noise_; }
  int dim() const { return noise_.dim(); }

  virtual FactorType type() const = 0;
  /// Unwhitened residual.
  virtual Eigen::VectorXd residual(const Values& values) const = 0;
  /// Unwhitened Jacobians, one per key, w.r.t. the tangent of each variable.
  virtual std::vector<Eigen::MatrixXd> jacobians(const Values& values) const = 0;

  Linearization linearize(const Values& values) const;
  /// Mahalanobis cost r^T Sigma^-1 r.
  double cost(const Values& values) const;

 private:
  std::vector<VariableKey> keys_;
  NoiseModel noise_;
};

using FactorPtr = std::shared_ptr<const Factor>;

class PriorFactor final : public Factor {
 public:
  PriorFactor(ArticulationState prior, NoiseModel noise);
  FactorType type() const override { return FactorType::Prior; }
  Eigen::VectorXd residual(const Values& values) const override;
  std::vector<Eigen::MatrixXd> jacobians(const Values& values) const override;
  const ArticulationState& prior() const { return prior_; }

 private:
  ArticulationState prior_;
};

class AffordanceFactor final : public Factor {
 public:
  AffordanceFactor(Vector3 point, Vector3 flow, NoiseModel noise);
  FactorType type() const override { return FactorType::Affordance; }
  Eigen::VectorXd residual(const Values& values) const override;
  std::vector<Eigen::MatrixXd> jacobians(const Values& values) const override;

 private:
  Vector3 point_;
  Vector3 flow_;
};

class ForceFactor final : public Factor {
 public:
  ForceFactor(ForceMeasurement measurement, NoiseModel noise);
  FactorType type() const override { return FactorType::Force; }
  Eigen::VectorXd residual(const Values& values) const override;
  std::vector<Eigen::MatrixXd> jacobians(const Values& values) const override;
  const ForceMeasurement& measurement() const { return measurement_; }

 private:
  ForceMeasurement measurement_;
};

/// SE(3) unary factor on a PoseA or PoseB variable.
class KinematicFactor final : public Factor {
 public:
  KinematicFactor(VariableKey key, Pose measured, NoiseModel noise);
  FactorType type() const override { return FactorType::Kinematic; }
  Eigen::VectorXd residual(const Values& values) const override;
  std::vector<Eigen::MatrixXd> jacobians(const Values& values) const override;
  const Pose& measured() const { return measured_; }

 private:
  Pose measured_;
};

/// Ties xi, theta_k, T_A_k, T_B_k through the screw model.
class ArticulationFactor final : public Factor {
 public:
  ArticulationFactor(int k, NoiseModel noise);
  FactorType type() const override { return FactorType::Articulation; }
  Eigen::VectorXd residual(const Values& values) const override;
  std::vector<Eigen::MatrixXd> jacobians(const Values& values) const override;
};

}  // namespace artic
