#include <doctest.h>

#include <cmath>
#include <numbers>

#include "artic/error.hpp"
#include "artic/motion.hpp"
#include "oracles.hpp"

using namespace artic;
using artic::testing::Rng;

namespace {

/// Planar two-link arm with unit links rotating about z.
ChainModel planar_2r() {
  ChainModel c;
  c.axes = {Vector3::UnitZ(), Vector3::UnitZ()};
  c.offsets = {Vector3::Zero(), Vector3(1, 0, 0)};
  c.tool = Pose::from_translation({1, 0, 0});
  c.lower = Eigen::Vector2d::Constant(-3.0);
  c.upper = Eigen::Vector2d::Constant(3.0);
  c.velocity_lower = Eigen::Vector2d::Constant(-100.0);
  c.velocity_upper = Eigen::Vector2d::Constant(100.0);
  return c;
}

}  // namespace

TEST_CASE("advance steps and bounces") {
  OpeningSchedule s{0.1, 0.1, 0.0, 0.0, 0.05, 1.0};
  CHECK(advance(s) == doctest::Approx(0.01));
  for (int i = 0; i < 3; ++i) advance(s);
  CHECK(s.theta == doctest::Approx(0.04));
  CHECK(advance(s) == doctest::Approx(0.05));
  CHECK(s.sign == -1.0);
  CHECK(advance(s) == doctest::Approx(0.04));

  OpeningSchedule low{0.1, 0.1, 0.005, 0.0, 1.0, -1.0};
  CHECK(advance(low) == 0.0);
  CHECK(low.sign == 1.0);
}

TEST_CASE("advance is periodic over a full sweep") {
  // increments exact in binary so that the bounds are hit exactly
  OpeningSchedule s{0.25, 0.125, 0.0, 0.0, 0.125, 1.0};
  std::vector<double> first;
  for (int i = 0; i < 8; ++i) first.push_back(advance(s));
  for (int i = 0; i < 8; ++i) CHECK(advance(s) == doctest::Approx(first[static_cast<std::size_t>(i)]));
  for (double t : first) {
    CHECK(t >= 0.0);
    CHECK(t <= 0.125);
  }
}

TEST_CASE("goal_pose examples") {
  const Pose base(exp_so3(Vector3::UnitX(), 0.3), Vector3(1, 2, 3));
  const Twist door({0, 0, 0}, {0, 0, 1});
  CHECK(goal_pose(door, 0.0, base).is_approx(base, 0.0));
  const Pose g = goal_pose(Twist({-1, 0, 0}, {0, 0, 0}), 0.1, Pose::identity());
  CHECK(g.translation().isApprox(Vector3(-0.1, 0, 0)));
  const Pose r = goal_pose(Twist({0.5, 0, 0}, {0, 0, 1}), std::numbers::pi / 2, Pose::identity());
  // revolute about z through (0, 0.5, 0)
  CHECK(r.translation().isApprox(Vector3(0.5, 0.5, 0)));
  CHECK(r.rotation().isApprox(exp_so3(Vector3::UnitZ(), std::numbers::pi / 2)));
}

TEST_CASE("chain Jacobian matches finite differences") {
  Rng rng(41);
  const ChainModel c = default_chain(rng.pose());
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd q(7);
    for (int i = 0; i < 7; ++i) q[i] = rng.uniform(-2.0, 2.0);
    const Eigen::MatrixXd j = c.jacobian(q);
    const Pose t0 = c.forward(q);
    const double h = 1e-6;
    for (int i = 0; i < 7; ++i) {
      Eigen::VectorXd qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      const Pose tp = c.forward(qp), tm = c.forward(qm);
      const Vector3 dp = (tp.translation() - tm.translation()) / (2 * h);
      // world-frame angular velocity from dR R^T
      const Matrix3 dr = (tp.rotation() - tm.rotation()) / (2 * h);
      const Vector3 w = vee3(dr * t0.rotation().transpose());
      CHECK((j.block<3, 1>(0, i) - dp).norm() < 1e-6);
      CHECK((j.block<3, 1>(3, i) - w).norm() < 1e-6);
    }
  }
  CHECK_THROWS_AS(c.forward(Eigen::VectorXd::Zero(3)), Error);
}

TEST_CASE("IK at the current pose needs no iterations") {
  const ChainModel c = default_chain();
  Eigen::VectorXd q(7);
  q << 0.1, 0.5, -0.2, 0.8, 0.3, -0.4, 0.2;
  const IkResult r = solve_ik(c, q, c.forward(q));
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  CHECK(r.q == q);
}

TEST_CASE("planar 2R IK matches the closed form") {
  const ChainModel c = planar_2r();
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Vector2d q_true(rng.uniform(-1.0, 1.0), rng.uniform(0.4, 2.0));
    const Pose target = c.forward(q_true);
    // closed-form elbow-up solution from the target position
    const double x = target.translation().x(), y = target.translation().y();
    const double q2 = std::acos((x * x + y * y - 2.0) / 2.0);
    const double q1 = std::atan2(y, x) - std::atan2(std::sin(q2), 1.0 + std::cos(q2));
    const Eigen::Vector2d q0 = q_true + Eigen::Vector2d(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2));
    const IkResult r = solve_ik(c, q0, target);
    CHECK(r.converged);
    CHECK(std::abs(r.q[0] - q1) < 1e-5);
    CHECK(std::abs(r.q[1] - q2) < 1e-5);
  }
}

TEST_CASE("7-DoF IK reaches nearby targets") {
  const ChainModel c = default_chain();
  Rng rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd q(7);
    // bent elbows keep the arm away from the stretched-out singularity
    for (int i = 0; i < 7; ++i) q[i] = i % 2 ? rng.uniform(0.5, 1.2) : rng.uniform(-1.0, 1.0);
    const Pose target = c.forward(q) * expmap(rng.vec6(0.01));
    const IkResult r = solve_ik(c, q, target);
    CHECK(r.converged);
    CHECK(r.position_error < 1e-6);
  }
}

TEST_CASE("unreachable target stays within joint limits") {
  ChainModel c = planar_2r();
  c.lower = Eigen::Vector2d(-0.5, -0.5);
  c.upper = Eigen::Vector2d(0.5, 0.5);
  const IkResult r = solve_ik(c, Eigen::Vector2d::Zero(), Pose::from_translation({-3, 0, 0}));
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == IkParams{}.max_iterations);
  CHECK((r.q.array() >= c.lower.array()).all());
  CHECK((r.q.array() <= c.upper.array()).all());
  CHECK(r.position_error > 1.0);
}

TEST_CASE("IK respects velocity limits per iteration") {
  ChainModel c = planar_2r();
  c.velocity_lower = Eigen::Vector2d::Constant(-0.5);
  c.velocity_upper = Eigen::Vector2d::Constant(0.5);
  IkParams params;
  params.max_iterations = 1;
  const Pose target = c.forward(Eigen::Vector2d(1.0, 1.0));
  const IkResult r = solve_ik(c, Eigen::Vector2d(0.0, 0.5), target, params);
  CHECK(std::abs(r.q[0] - 0.0) <= 0.05 + 1e-12);
  CHECK(std::abs(r.q[1] - 0.5) <= 0.05 + 1e-12);
}

TEST_CASE("IK rejects mismatched bounds") {
  ChainModel c = planar_2r();
  c.lower = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(solve_ik(c, Eigen::Vector2d::Zero(), Pose()), Error);
}
