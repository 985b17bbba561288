#include "artic/graph.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>

#include "artic/error.hpp"

namespace artic {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Column offsets for every variable referenced by a factor set.
struct Ordering {
  std::map<VariableKey, int> offset;
  int dim = 0;

  explicit Ordering(std::span<const FactorPtr> factors) {
    for (const auto& f : factors) {
      for (const auto& key : f->keys()) {
        offset.emplace(key, 0);
      }
    }
    for (auto& [key, off] : offset) {
      off = dim;
      dim += key.dim();
    }
  }
};

struct NormalEquations {
  SparseMatrix hessian;
  Eigen::VectorXd gradient;
  double cost = 0.0;
};

NormalEquations build_normal_equations(std::span<const FactorPtr> factors, const Values& values,
                                       const Ordering& ordering) {
  std::vector<Eigen::Triplet<double>> triplets;
  NormalEquations ne;
  ne.gradient = Eigen::VectorXd::Zero(ordering.dim);
  std::vector<int> offsets;
  for (const auto& f : factors) {
    const Linearization lin = f->linearize(values);
    ne.cost += lin.residual.squaredNorm();
    const auto& keys = f->keys();
    offsets.clear();
    for (const auto& key : keys) {
      offsets.push_back(ordering.offset.at(key));
    }
    for (std::size_t a = 0; a < keys.size(); ++a) {
      const Eigen::MatrixXd& ja = lin.jacobians[a];
      ne.gradient.segment(offsets[a], ja.cols()) += ja.transpose() * lin.residual;
      for (std::size_t b = 0; b < keys.size(); ++b) {
        const Eigen::MatrixXd block = ja.transpose() * lin.jacobians[b];
        for (int i = 0; i < block.rows(); ++i) {
          for (int j = 0; j < block.cols(); ++j) {
            triplets.emplace_back(offsets[a] + i, offsets[b] + j, block(i, j));
          }
        }
      }
    }
  }
  ne.hessian.resize(ordering.dim, ordering.dim);
  ne.hessian.setFromTriplets(triplets.begin(), triplets.end());
  return ne;
}

double total_cost(std::span<const FactorPtr> factors, const Values& values) {
  double cost = 0.0;
  for (const auto& f : factors) {
    cost += f->cost(values);
  }
  return cost;
}

Values apply_step(const Values& values, const Ordering& ordering, const Eigen::VectorXd& step) {
  Values out = values;
  for (const auto& [key, off] : ordering.offset) {
    out.retract(key, step.segment(off, key.dim()));
  }
  return out;
}

SparseMatrix damped(const SparseMatrix& h, double lambda) {
  SparseMatrix out = h;
  for (int i = 0; i < out.rows(); ++i) {
    const double d = std::max(h.coeff(i, i), 1e-9);
    out.coeffRef(i, i) += lambda * d;
  }
  return out;
}

}  // namespace

LmSummary levenberg_marquardt(std::span<const FactorPtr> factors, Values& values,
                              const LmParams& params) {
  LmSummary summary;
  const Ordering ordering(factors);
  if (ordering.dim == 0) {
    return summary;
  }
  double lambda = params.initial_lambda;
  NormalEquations ne = build_normal_equations(factors, values, ordering);
  summary.initial_cost = ne.cost;
  summary.final_cost = ne.cost;
  summary.accepted_costs.push_back(ne.cost);

  Eigen::SimplicialLDLT<SparseMatrix> solver;
  bool pattern_ready = false;

  while (summary.iterations < params.max_iterations) {
    if (ne.gradient.lpNorm<Eigen::Infinity>() < params.gradient_tolerance || ne.cost == 0.0) {
      summary.converged = true;
      break;
    }
    ++summary.iterations;

    const SparseMatrix system = damped(ne.hessian, lambda);
    if (!pattern_ready) {
      solver.analyzePattern(system);
      pattern_ready = true;
    }
    solver.factorize(system);
    bool accepted = false;
    if (solver.info() == Eigen::Success) {
      const Eigen::VectorXd step = solver.solve(-ne.gradient);
      if (step.allFinite()) {
        try {
          Values candidate = apply_step(values, ordering, step);
          const double new_cost = total_cost(factors, candidate);
          if (std::isfinite(new_cost) && new_cost < ne.cost) {
            const double decrease = (ne.cost - new_cost) / std::max(ne.cost, 1e-300);
            values = std::move(candidate);
            ne = build_normal_equations(factors, values, ordering);
            summary.accepted_costs.push_back(ne.cost);
            summary.final_cost = ne.cost;
            lambda = std::max(lambda / params.lambda_factor, 1e-12);
            accepted = true;
            if (decrease < params.relative_tolerance) {
              summary.converged = true;
              break;
            }
          }
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::AngleNearPi) {
            throw;
          }
        }
      }
    }
    if (!accepted) {
      lambda *= params.lambda_factor;
      if (lambda > params.max_lambda) {
        summary.converged = true;
        break;
      }
    }
  }
  return summary;
}

MarginalCovariance marginal_covariance(std::span<const FactorPtr> factors, const Values& values,
                                       std::span<const VariableKey> keys) {
  const Ordering ordering(factors);
  const NormalEquations ne = build_normal_equations(factors, values, ordering);

  int rhs_cols = 0;
  for (const auto& key : keys) {
    rhs_cols += key.dim();
  }
  Eigen::MatrixXd selector = Eigen::MatrixXd::Zero(ordering.dim, rhs_cols);
  int col = 0;
  for (const auto& key : keys) {
    const int off = ordering.offset.at(key);
    for (int i = 0; i < key.dim(); ++i) {
      selector(off + i, col++) = 1.0;
    }
  }

  MarginalCovariance out;
  Eigen::SimplicialLLT<SparseMatrix> llt(ne.hessian);
  if (llt.info() != Eigen::Success) {
    out.singular = true;
    SparseMatrix loaded = ne.hessian;
    for (int i = 0; i < loaded.rows(); ++i) {
      loaded.coeffRef(i, i) += 1e-9 * std::max(ne.hessian.coeff(i, i), 1.0);
    }
    llt.compute(loaded);
  }
  const Eigen::MatrixXd columns = llt.solve(selector);
  out.covariance = selector.transpose() * columns;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

// ---------------------------------------------------------------------------

ArticulationState seed_from_cloud(const FlowCloud& cloud) {
  Vector3 mean = Vector3::Zero();
  Vector3 largest = Vector3::Zero();
  std::size_t n = 0;
  for (const auto& p : cloud.points) {
    if (!p.articulated) {
      continue;
    }
    mean += p.flow;
    if (p.flow.norm() > largest.norm()) {
      largest = p.flow;
    }
    ++n;
  }
  if (n == 0) {
    throw Error(ErrorKind::EmptyCloud, "cloud has no articulated points");
  }
  mean /= static_cast<double>(n);
  Vector3 v = mean.norm() > 1e-9 ? mean : largest;
  if (v.norm() <= 1e-12) {
    v = Vector3::UnitX() * kAffordanceIncrement;
  }
  return {Twist(v / kAffordanceIncrement, Vector3::Zero()), 0.0};
}

FactorGraph::FactorGraph(GraphConfig config, ArticulationState prior, Pose base_frame)
    : config_(config), base_frame_(base_frame) {
  values_.xi = prior.xi;
  values_.theta.push_back(prior.theta);
  factors_.push_back(std::make_shared<PriorFactor>(
      prior, NoiseModel::isotropic(7, std::sqrt(config_.prior_variance))));
}

ArticulationState FactorGraph::estimate() const { return {values_.xi, values_.theta.back()}; }

int FactorGraph::count(FactorType type) const {
  return static_cast<int>(std::count_if(factors_.begin(), factors_.end(),
                                        [type](const FactorPtr& f) { return f->type() == type; }));
}

std::size_t FactorGraph::add_affordance_cloud(const FlowCloud& cloud) {
  if (has_affordance_) {
    throw Error(ErrorKind::DuplicateAffordance, "an affordance cloud was already added");
  }
  std::vector<FactorPtr> added;
  for (const auto& p : cloud.points) {
    if (!p.articulated) {
      continue;
    }
    if (!p.position.allFinite() || !p.flow.allFinite() || !p.log_sigma.allFinite()) {
      continue;
    }
    added.push_back(std::make_shared<AffordanceFactor>(
        p.position, p.flow, NoiseModel::from_variances(variances_from_log_sigma(p.log_sigma))));
  }
  if (added.empty()) {
    throw Error(ErrorKind::EmptyCloud, "cloud has no usable articulated points");
  }
  factors_.insert(factors_.end(), added.begin(), added.end());
  has_affordance_ = true;
  return added.size();
}

void FactorGraph::add_state(const Pose& t_ee, const Pose& t_grasp0, double theta_seed) {
  const int k = static_cast<int>(values_.pose_a.size());
  if (k >= static_cast<int>(values_.theta.size())) {
    values_.theta.push_back(theta_seed);
  }
  values_.pose_a.push_back(t_ee);
  values_.pose_b.push_back(t_grasp0);
  measured_a_.push_back(t_ee);
  const NoiseModel kin = NoiseModel::isotropic(6, config_.kinematic_sigma);
  factors_.push_back(std::make_shared<ArticulationFactor>(
      k, NoiseModel::isotropic(6, std::sqrt(config_.articulation_variance))));
  factors_.push_back(std::make_shared<KinematicFactor>(VariableKey::pose_a(k), t_ee, kin));
  factors_.push_back(std::make_shared<KinematicFactor>(VariableKey::pose_b(k), t_grasp0, kin));
}

void FactorGraph::start_contact(const Pose& t_grasp0) {
  if (in_contact_) {
    return;
  }
  add_state(t_grasp0, t_grasp0, values_.theta.front());
  in_contact_ = true;
}

bool FactorGraph::maybe_add_kinematic(const Pose& t_ee, const Pose& t_grasp0) {
  start_contact(t_grasp0);
  const Pose& last = measured_a_.back();
  const Pose rel = last.inverse() * t_ee;
  if (rel.translation().norm() < config_.d_translation && rel.angle() < config_.d_rotation) {
    return false;
  }
  // theta increment: size of the relative motion in units of the current
  // twist, signed by its projection. A projection alone would seed 0 for a
  // twist orthogonal to the motion, where the articulation residual is stationary.
  double theta_seed = values_.theta.back();
  const Vector6 xi = values_.xi.vector();
  const double xi_norm = xi.norm();
  if (xi_norm > 1e-6) {
    const Pose prev_local = t_grasp0.inverse() * last;
    const Pose new_local = t_grasp0.inverse() * t_ee;
    const Vector6 d = log_se3(prev_local.inverse() * new_local);
    theta_seed += (xi.dot(d) >= 0.0 ? 1.0 : -1.0) * d.norm() / xi_norm;
  }
  add_state(t_ee, t_grasp0, theta_seed);
  ++kinematic_since_solve_;
  return true;
}

void FactorGraph::add_force_factor(const ForceMeasurement& world_measurement) {
  const double magnitude = world_measurement.force.norm();
  if (magnitude <= config_.force_threshold) {
    throw Error(ErrorKind::BelowThreshold, "force " + std::to_string(magnitude) +
                                               " N does not exceed threshold " +
                                               std::to_string(config_.force_threshold) + " N");
  }
  if (values_.pose_a.size() > 1) {
    throw Error(ErrorKind::PreconditionViolated,
                "force factors require the part not to have moved since the grasp");
  }
  ForceMeasurement local = world_measurement;
  local.force = base_frame_.rotation().transpose() * world_measurement.force;
  local.point = base_frame_.inverse() * world_measurement.point;
  local.index = count(FactorType::Force);
  factors_.push_back(std::make_shared<ForceFactor>(
      local, NoiseModel::isotropic(3, std::sqrt(config_.force_variance))));
  force_pending_ = true;
}

void FactorGraph::add_factor(FactorPtr factor) {
  for (const auto& key : factor->keys()) {
    if (!values_.contains(key)) {
      throw Error(ErrorKind::PreconditionViolated, "factor references a missing variable");
    }
  }
  factors_.push_back(std::move(factor));
}

bool FactorGraph::should_reoptimize() const {
  return force_pending_ || kinematic_since_solve_ >= config_.reoptimize_count;
}

MarginalReport FactorGraph::optimize() {
  const LmSummary lm = levenberg_marquardt(factors_, values_, config_.lm);
  kinematic_since_solve_ = 0;
  force_pending_ = false;
  MarginalReport report = marginals(values_, factors_.size());
  report.iterations = lm.iterations;
  report.cost = lm.final_cost;
  return report;
}

MarginalReport FactorGraph::marginals(const Values& values, std::size_t factor_count) const {
  const std::span<const FactorPtr> subset(factors_.data(), std::min(factor_count, factors_.size()));
  int last_theta = 0;
  for (const auto& f : subset) {
    for (const auto& key : f->keys()) {
      if (key.kind == VariableKind::Theta) {
        last_theta = std::max(last_theta, key.index);
      }
    }
  }
  const VariableKey keys[] = {VariableKey::xi(), VariableKey::theta(last_theta)};
  const MarginalCovariance cov = marginal_covariance(subset, values, keys);
  MarginalReport report;
  report.sigma_xi = cov.covariance.diagonal().head<6>().cwiseMax(0.0).cwiseSqrt();
  report.sigma_theta = std::sqrt(std::max(cov.covariance(6, 6), 0.0));
  report.singular = cov.singular;
  report.cost = 0.0;
  for (const auto& f : subset) {
    report.cost += f->cost(values);
  }
  return report;
}

}  // namespace artic
