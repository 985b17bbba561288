#pragma once

#include <map>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "artic/factors.hpp"
#include "artic/oracle.hpp"

namespace artic {

// ---------------------------------------------------------------------------
// Levenberg-Marquardt over an arbitrary factor set
// ---------------------------------------------------------------------------

struct LmParams {
  double initial_lambda = 1e-4;
  double lambda_factor = 10.0;
  double max_lambda = 1e12;
  int max_iterations = 100;
  double relative_tolerance = 1e-9;
  double gradient_tolerance = 1e-10;
};

struct LmSummary {
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  /// Cost after every accepted step (starting with the initial cost).
  std::vector<double> accepted_costs;
  bool converged = false;
};

/// Minimises sum_i r_i^T Sigma_i^-1 r_i in place. Pose variables move by
/// right retraction; Xi and Theta additively.
LmSummary levenberg_marquardt(std::span<const FactorPtr> factors, Values& values,
                              const LmParams& params = {});

/// Joint marginal covariance of `keys` from the Gauss-Newton Hessian of
/// `factors` at `values`. `singular` is set when the Hessian is not positive
/// definite and a 1e-9 relative diagonal load was needed.
struct MarginalCovariance {
  Eigen::MatrixXd covariance;
  bool singular = false;
};

MarginalCovariance marginal_covariance(std::span<const FactorPtr> factors, const Values& values,
                                       std::span<const VariableKey> keys);

// ---------------------------------------------------------------------------
// Articulation graph
// ---------------------------------------------------------------------------

struct GraphConfig {
  double prior_variance = 10.0;
  double articulation_variance = 1e-4;
  double kinematic_sigma = 1e-3;
  double force_variance = 1e-6;
  double force_threshold = 8.0;       // N
  double d_translation = 0.002;       // m
  double d_rotation = 0.5 * 3.14159265358979323846 / 180.0;  // rad
  int reoptimize_count = 20;
  LmParams lm;
};

struct MarginalReport {
  Vector6 sigma_xi = Vector6::Zero();
  double sigma_theta = 0.0;
  int iterations = 0;
  double cost = 0.0;
  bool singular = false;
};

/// Factor graph over {xi, theta_k, T_A_k, T_B_k}. The twist is expressed in
/// the base frame B, whose world pose is given at construction (the initial
/// grasp pose). Pose variables live in the world frame.
class FactorGraph {
 public:
  FactorGraph(GraphConfig config, ArticulationState prior, Pose base_frame = Pose::identity());

  const GraphConfig& config() const { return config_; }
  const Pose& base_frame() const { return base_frame_; }
  const Values& values() const { return values_; }
  const std::vector<FactorPtr>& factors() const { return factors_; }

  /// Current estimate of xi and the latest articulation state.
  ArticulationState estimate() const;
  int num_states() const { return static_cast<int>(values_.theta.size()); }
  int count(FactorType type) const;
  bool in_contact() const { return in_contact_; }
  const std::vector<Pose>& measured_poses() const { return measured_a_; }

  /// One affordance factor per articulated point, whitened by exp(2u).
  /// Throws EmptyCloud or DuplicateAffordance.
  std::size_t add_affordance_cloud(const FlowCloud& cloud);

  /// Attaches pose variables to state 0 with both kinematic measurements set
  /// to the grasp pose. Called implicitly by the first maybe_add_kinematic.
  void start_contact(const Pose& t_grasp0);

  /// Adds state k when the end effector moved >= d_translation or rotated
  /// >= d_rotation since the last accepted measurement.
  bool maybe_add_kinematic(const Pose& t_ee, const Pose& t_grasp0);

  /// Measurement in the world frame; converted into B before insertion.
  /// Throws BelowThreshold, or PreconditionViolated once the part has moved.
  void add_force_factor(const ForceMeasurement& world_measurement);

  /// Appends an arbitrary factor; its keys must already exist.
  void add_factor(FactorPtr factor);

  bool should_reoptimize() const;

  MarginalReport optimize();

  /// Marginals of xi and the latest theta touched by the first
  /// `factor_count` factors, linearised at `values`.
  MarginalReport marginals(const Values& values, std::size_t factor_count) const;

 private:
  void add_state(const Pose& t_ee, const Pose& t_grasp0, double theta_seed);

  GraphConfig config_;
  Pose base_frame_;
  Values values_;
  std::vector<FactorPtr> factors_;
  std::vector<Pose> measured_a_;
  bool has_affordance_ = false;
  bool in_contact_ = false;
  bool force_pending_ = false;
  int kinematic_since_solve_ = 0;
};

/// Mean predicted flow direction as v, zero angular part, theta 0. Used as
/// both the initial value and the weak prior mean.
ArticulationState seed_from_cloud(const FlowCloud& cloud);

}  // namespace artic
