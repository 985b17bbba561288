#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "artic/error.hpp"
#include "artic/graph.hpp"
#include "artic/oracle.hpp"
#include "oracles.hpp"

using namespace artic;
using artic::testing::Rng;

namespace {

double deg(double d) { return d * std::numbers::pi / 180.0; }

/// Grasp-point direction agreement between two twists, evaluated along the
/// true trajectory of a grasp at the frame origin. `direction` orients the
/// estimate (sign of its theta travel).
double similarity_along(const Twist& truth, const Twist& est, double theta_end, double direction = 1.0) {
  std::vector<Vector3> gt, ev;
  for (int i = 0; i < 10; ++i) {
    const double th = theta_end * i / 9.0;
    const Vector3 c = exp_se3(truth, th) * Vector3::Zero();
    gt.push_back(point_velocity(truth, c));
    ev.push_back(direction * point_velocity(est, c));
  }
  return tangent_similarity(gt, ev);
}

double travel_sign(const FactorGraph& g) {
  return g.values().theta.back() >= g.values().theta.front() ? 1.0 : -1.0;
}

FlowCloud door_cloud(const Twist& xi, int n, std::uint64_t seed = 3) {
  OracleSpec spec;
  spec.true_xi = xi;
  spec.reported_xi = xi;
  spec.num_points = n;
  spec.panel.center = Vector3(0.0, -0.2, 0.0);
  spec.seed = seed;
  return generate(spec);
}

// Revolute about z through (0, -0.5, 0): the frame origin is the grasp point.
const Twist kDoor(Vector3(-0.5, 0, 0), Vector3(0, 0, 1));

}  // namespace

TEST_CASE("prior-only graph returns the prior") {
  const ArticulationState prior{Twist({0.2, -0.1, 0.3}, {0, 0, 0.5}), 0.1};
  FactorGraph g(GraphConfig{}, prior);
  const MarginalReport rep = g.optimize();
  CHECK((g.values().xi.vector() - prior.xi.vector()).norm() < 1e-12);
  CHECK(g.values().theta[0] == doctest::Approx(0.1));
  CHECK(rep.cost < 1e-20);
  // marginal equals the prior covariance
  for (int i = 0; i < 6; ++i) CHECK(rep.sigma_xi[i] == doctest::Approx(std::sqrt(10.0)));
}

TEST_CASE("affordance cloud sizes and errors") {
  for (int n : {200, 1000}) {
    const FlowCloud c = door_cloud(kDoor, n);
    FactorGraph g(GraphConfig{}, seed_from_cloud(c));
    CHECK(g.add_affordance_cloud(c) == static_cast<std::size_t>(n));
    CHECK(g.count(FactorType::Affordance) == n);
    CHECK_THROWS_AS(g.add_affordance_cloud(c), Error);
    try {
      g.add_affordance_cloud(c);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DuplicateAffordance);
    }
  }
  FlowCloud none;
  none.points.push_back(FlowPoint{Vector3::Zero(), false, Vector3::Zero(), Vector3::Zero()});
  FactorGraph g(GraphConfig{}, ArticulationState{Twist({1, 0, 0}, {0, 0, 0}), 0.0});
  try {
    g.add_affordance_cloud(none);
    FAIL("expected EmptyCloud");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyCloud);
  }
}

TEST_CASE("affordance-only solve recovers the twist from a consistent cloud") {
  const FlowCloud c = door_cloud(kDoor, 1000);
  FactorGraph g(GraphConfig{}, seed_from_cloud(c));
  g.add_affordance_cloud(c);
  const MarginalReport rep = g.optimize();
  const NormalizedTwist n = normalize(g.values().xi);
  CHECK(n.joint == JointClass::Revolute);
  CHECK((n.xi.vector() - normalize(kDoor).xi.vector()).norm() < 1e-3);
  CHECK(similarity_along(kDoor, g.values().xi, 1.0) > 0.999);
  CHECK(rep.iterations > 0);
}

TEST_CASE("solution is invariant to affordance ordering") {
  OracleSpec spec;
  spec.true_xi = kDoor;
  spec.reported_xi = kDoor;
  spec.num_points = 300;
  spec.flow_sigma = Vector3::Constant(0.002);
  spec.seed = 9;
  FlowCloud c = generate(spec);
  FactorGraph a(GraphConfig{}, seed_from_cloud(c));
  a.add_affordance_cloud(c);
  a.optimize();
  std::mt19937 rng(4);
  std::shuffle(c.points.begin(), c.points.end(), rng);
  FactorGraph b(GraphConfig{}, seed_from_cloud(c));
  b.add_affordance_cloud(c);
  b.optimize();
  CHECK(similarity_along(a.values().xi, b.values().xi, 1.0) > 0.9999);
}

TEST_CASE("accepted LM steps never increase the cost") {
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    OracleSpec spec;
    spec.true_xi = Twist(rng.vec3(), rng.vec3());
    spec.reported_xi = spec.true_xi;
    spec.num_points = 200;
    spec.flow_sigma = Vector3::Constant(0.003);
    spec.seed = 100 + static_cast<std::uint64_t>(trial);
    const FlowCloud c = generate(spec);
    std::vector<FactorPtr> factors;
    factors.push_back(std::make_shared<PriorFactor>(ArticulationState{Twist({1, 0, 0}, {0, 0, 0}), 0.0},
                                                    NoiseModel::isotropic(7, 3.0)));
    for (const auto& p : c.points) {
      factors.push_back(std::make_shared<AffordanceFactor>(
          p.position, p.flow, NoiseModel::from_variances(variances_from_log_sigma(p.log_sigma))));
    }
    Values v;
    v.xi = Twist({1, 0, 0}, {0, 0, 0});
    v.theta = {0.0};
    const LmSummary s = levenberg_marquardt(factors, v);
    for (std::size_t i = 1; i < s.accepted_costs.size(); ++i) {
      CHECK(s.accepted_costs[i] <= s.accepted_costs[i - 1]);
    }
    CHECK(s.final_cost <= s.initial_cost);
  }
}

TEST_CASE("kinematic trigger thresholds") {
  const Pose g0 = Pose::from_translation({0.0, 0.5, 0.0});
  FactorGraph g(GraphConfig{}, ArticulationState{Twist({-1, 0, 0}, {0, 0, 0}), 0.0}, g0);
  const auto rz = [](double a) { return Pose::from_rotation(exp_so3(Vector3::UnitZ(), a)); };

  CHECK_FALSE(g.maybe_add_kinematic(g0 * Pose::from_translation({0.001, 0, 0}) * rz(deg(0.1)), g0));
  CHECK(g.in_contact());
  CHECK(g.num_states() == 1);
  CHECK(g.maybe_add_kinematic(g0 * Pose::from_translation({0.0025, 0, 0}), g0));
  CHECK(g.num_states() == 2);
  CHECK(g.maybe_add_kinematic(g0 * Pose::from_translation({0.0025, 0, 0}) * rz(deg(0.6)), g0));
  CHECK(g.num_states() == 3);
  CHECK(g.count(FactorType::Kinematic) == 6);
  CHECK(g.count(FactorType::Articulation) == 3);
}

TEST_CASE("reoptimization policy") {
  const Pose g0 = Pose::identity();
  FactorGraph g(GraphConfig{}, ArticulationState{Twist({-1, 0, 0}, {0, 0, 0}), 0.0}, g0);
  CHECK_FALSE(g.should_reoptimize());
  for (int i = 1; i <= 19; ++i) {
    REQUIRE(g.maybe_add_kinematic(Pose::from_translation({-0.003 * i, 0, 0}), g0));
  }
  CHECK_FALSE(g.should_reoptimize());
  REQUIRE(g.maybe_add_kinematic(Pose::from_translation({-0.003 * 20, 0, 0}), g0));
  CHECK(g.should_reoptimize());
  g.optimize();
  CHECK_FALSE(g.should_reoptimize());

  FactorGraph f(GraphConfig{}, ArticulationState{Twist({-1, 0, 0}, {0, 0, 0}), 0.0}, g0);
  f.add_force_factor({{12, 0, 0}, {0, 0, 0}, 0});
  CHECK(f.should_reoptimize());
}

TEST_CASE("force factor threshold and accumulation") {
  FactorGraph g(GraphConfig{}, ArticulationState{Twist({0, 0, -1}, {0, 0, 0}), 0.0});
  g.add_force_factor({{0, 0, 12}, {0, 0, 0}, 0});
  CHECK(g.count(FactorType::Force) == 1);
  try {
    g.add_force_factor({{0, 0, 5}, {0, 0, 0}, 1});
    FAIL("expected BelowThreshold");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BelowThreshold);
  }
  g.optimize();
  g.add_force_factor({{0, 3, 12}, {0, 0, 0}, 1});
  CHECK(g.count(FactorType::Force) == 2);

  // once the part has moved, force factors are refused
  const Pose g0 = Pose::identity();
  g.maybe_add_kinematic(Pose::from_translation({0.01, 0, 0}), g0);
  try {
    g.add_force_factor({{0, 0, 12}, {0, 0, 0}, 2});
    FAIL("expected PreconditionViolated");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PreconditionViolated);
  }
}

TEST_CASE("force factor in the world frame is moved into the base frame") {
  const Pose base(exp_so3(Vector3::UnitZ(), std::numbers::pi / 2), Vector3(1, 2, 3));
  FactorGraph g(GraphConfig{}, ArticulationState{Twist({1, 0, 0}, {0, 0, 0}), 0.0}, base);
  g.add_force_factor({{10, 0, 0}, {1, 2, 3}, 0});
  const auto* f = dynamic_cast<const ForceFactor*>(g.factors().back().get());
  REQUIRE(f != nullptr);
  CHECK((f->measurement().force - Vector3(0, -10, 0)).norm() < 1e-12);
  CHECK(f->measurement().point.norm() < 1e-12);
}

TEST_CASE("three noiseless measurements recover revolute and prismatic joints") {
  struct Case {
    Twist truth;
    double range;
    JointClass joint;
  };
  const Case cases[] = {{kDoor, deg(30.0), JointClass::Revolute},
                        {Twist({-1, 0, 0}, {0, 0, 0}), 0.1, JointClass::Prismatic}};
  for (const auto& c : cases) {
    const Pose g0 = Pose::from_translation({0.3, 0.4, 0.5});
    GraphConfig cfg;
    cfg.d_translation = 1e-4;
    FactorGraph g(cfg, ArticulationState{Twist({0, 1, 0}, {0, 0, 0}), 0.0}, g0);
    for (int k = 0; k < 3; ++k) {
      const Pose t = g0 * exp_se3(c.truth, c.range * k / 2.0);
      if (k == 0) g.start_contact(g0);
      else REQUIRE(g.maybe_add_kinematic(t, g0));
    }
    g.optimize();
    CHECK(similarity_along(c.truth, g.values().xi, c.range, travel_sign(g)) >= 0.99);
    CHECK(classify(g.values().xi) == c.joint);
  }
}

TEST_CASE("zero-residual factor leaves the optimum unchanged") {
  const FlowCloud c = door_cloud(kDoor, 200);
  FactorGraph g(GraphConfig{}, seed_from_cloud(c));
  g.add_affordance_cloud(c);
  g.optimize();
  const Vector6 before = g.values().xi.vector();
  const Vector3 p(0.1, 0.2, 0.3);
  g.add_factor(std::make_shared<AffordanceFactor>(p, exp_se3(g.values().xi, kAffordanceIncrement) * p - p,
                                                  NoiseModel::isotropic(3, 0.01)));
  g.optimize();
  CHECK((g.values().xi.vector() - before).norm() < 1e-6);
  CHECK_THROWS_AS(g.add_factor(std::make_shared<KinematicFactor>(VariableKey::pose_a(5), Pose(),
                                                                 NoiseModel::isotropic(6, 1.0))),
                  Error);
}

TEST_CASE("marginals of xi shrink as measurements accumulate") {
  Rng rng(11);
  const Pose g0 = Pose::from_translation({0.0, 0.5, 0.0});
  const Twist truth_b = kDoor;
  FactorGraph g(GraphConfig{}, ArticulationState{Twist({-1, 0, 0}, {0, 0, 0}), 0.0}, g0);
  std::vector<std::size_t> counts;
  for (int k = 1; k <= 40; ++k) {
    const Pose t = g0 * exp_se3(truth_b, deg(0.5) * k) * expmap(rng.vec6(1e-4));
    g.maybe_add_kinematic(t, g0);
    if (k % 10 == 0) {
      g.optimize();
      counts.push_back(g.factors().size());
    }
  }
  Vector6 prev = Vector6::Constant(std::numeric_limits<double>::infinity());
  for (std::size_t n : counts) {
    const MarginalReport r = g.marginals(g.values(), n);
    CHECK_FALSE(r.singular);
    for (int i = 0; i < 6; ++i) CHECK(r.sigma_xi[i] <= prev[i] * (1 + 1e-9));
    prev = r.sigma_xi;
  }
}

TEST_CASE("1000-factor affordance solve is fast") {
  const FlowCloud c = door_cloud(kDoor, 1000);
  FactorGraph g(GraphConfig{}, seed_from_cloud(c));
  g.add_affordance_cloud(c);
  const auto t0 = std::chrono::steady_clock::now();
  g.optimize();
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(s < 1.0);
}

TEST_CASE("seed_from_cloud uses the mean flow") {
  FlowCloud c;
  c.points.push_back({Vector3::Zero(), true, Vector3(0.05, 0, 0), Vector3::Zero()});
  c.points.push_back({Vector3::Zero(), true, Vector3(0.05, 0.1, 0), Vector3::Zero()});
  c.points.push_back({Vector3::Zero(), false, Vector3(9, 9, 9), Vector3::Zero()});
  const ArticulationState s = seed_from_cloud(c);
  CHECK((s.xi.v - Vector3(1.0, 1.0, 0)).norm() < 1e-12);
  CHECK(s.xi.w.isZero(0.0));
  CHECK(s.theta == 0.0);
}
