#include <doctest.h>

#include <cmath>
#include <numbers>

#include "artic/error.hpp"
#include "artic/sim.hpp"
#include "oracles.hpp"

using namespace artic;
using artic::testing::Rng;

namespace {

ArticulatedObject drawer() {
  ArticulatedObject o;
  o.xi = Twist({-1, 0, 0}, {0, 0, 0});
  o.theta_max = 0.35;
  o.friction = 2.0;
  return o;
}

ArticulatedObject door() {
  ArticulatedObject o;
  o.xi = Twist({0, 0, 0}, {0, 0, 1});
  o.theta_max = std::numbers::pi / 2;
  o.friction = 2.0;
  return o;
}

Pose at(const Vector3& p) { return Pose::from_translation(p); }

ErrorKind kind_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::IoError;
}

}  // namespace

TEST_CASE("drawer follows a 5 mm pull") {
  Simulator sim;
  const Pose g0 = at({0, 0.3, 0});
  sim.reset(drawer(), g0);
  const StepResult r = sim.step(at({-0.005, 0.3, 0}));
  CHECK(r.moved);
  CHECK(r.theta == doctest::Approx(0.005));
  CHECK(r.achieved.translation().isApprox(Vector3(-0.005, 0.3, 0)));
  CHECK(r.reaction.norm() < 1e-9);
  CHECK(sim.opening_fraction() == doctest::Approx(0.005 / 0.35));
  CHECK(sim.steps() == 1);
}

TEST_CASE("sliding door pulled outward is blocked and pushes back") {
  ArticulatedObject o;
  o.xi = Twist({0, 1, 0}, {0, 0, 0});
  o.theta_max = 0.4;
  o.friction = 5.0;
  Simulator sim;
  sim.reset(o, at({0, 0.3, 0}));
  const StepResult r = sim.step(at({-0.01, 0.3, 0}));
  CHECK_FALSE(r.moved);
  CHECK(r.theta == 0.0);
  CHECK(r.reaction.isApprox(Vector3(10, 0, 0)));
  CHECK(r.achieved.translation().isApprox(Vector3(0, 0.3, 0)));
}

TEST_CASE("friction holds small tangential commands") {
  Simulator sim;
  sim.reset(drawer(), at({0, 0.3, 0}));
  // 1.5 mm * 1000 N/m = 1.5 N < 2 N
  const StepResult r = sim.step(at({-0.0015, 0.3, 0}));
  CHECK_FALSE(r.moved);
  CHECK(r.reaction.isApprox(Vector3(1.5, 0, 0)));
}

TEST_CASE("door commanded toward the hinge does not move") {
  Simulator sim;
  sim.reset(door(), at({0.5, 0, 0}));
  const StepResult r = sim.step(at({0.45, 0, 0}));
  CHECK_FALSE(r.moved);
  CHECK(r.reaction.isApprox(Vector3(50, 0, 0)));
}

TEST_CASE("door follows a tangential command on its arc") {
  Simulator sim;
  sim.reset(door(), at({0.5, 0, 0}));
  const double a = 0.1;
  const StepResult r = sim.step(at({0.5 * std::cos(a), 0.5 * std::sin(a), 0}));
  CHECK(r.moved);
  CHECK(r.theta == doctest::Approx(a).epsilon(1e-12));
  CHECK(r.achieved.rotation().isApprox(exp_so3(Vector3::UnitZ(), a)));
  CHECK(r.reaction.norm() < 1e-9);
}

TEST_CASE("joint limits clamp theta") {
  Simulator sim;
  sim.reset(drawer(), at({0, 0.3, 0}));
  CHECK(sim.step(at({-1.0, 0.3, 0})).theta == doctest::Approx(0.35));
  CHECK(sim.opening_fraction() == doctest::Approx(1.0));
  CHECK(sim.step(at({1.0, 0.3, 0})).theta == doctest::Approx(0.0));
}

TEST_CASE("reset errors and degenerate range") {
  Simulator sim;
  CHECK(kind_of([&] { sim.reset(door(), at({0, 0, 0.3})); }) == ErrorKind::GraspOnHinge);
  CHECK(kind_of([&] { sim.reset(door(), at({0.0005, 0, 0})); }) == ErrorKind::GraspOnHinge);
  sim.reset(door(), at({0.002, 0, 0}));

  ArticulatedObject bad = drawer();
  bad.theta_min = 1.0;
  bad.theta_max = 0.5;
  CHECK(kind_of([&] { sim.reset(bad, at({0, 0, 0})); }) == ErrorKind::PreconditionViolated);

  ArticulatedObject locked = drawer();
  locked.theta_min = locked.theta_max = 0.2;
  sim.reset(locked, at({0, 0.3, 0}));
  CHECK(sim.theta() == 0.2);
  const StepResult r = sim.step(at({-1.0, 0.3, 0}));
  CHECK_FALSE(r.moved);
  CHECK(sim.opening_fraction() == 0.0);
}

TEST_CASE("stepping a detached gripper throws NotAttached") {
  Simulator sim;
  CHECK(kind_of([&] { sim.step(Pose()); }) == ErrorKind::NotAttached);
  sim.reset(drawer(), at({0, 0.3, 0}));
  sim.detach();
  CHECK(kind_of([&] { sim.step(Pose()); }) == ErrorKind::NotAttached);
}

TEST_CASE("grasp pose stays on the joint manifold") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    ArticulatedObject o;
    o.xi = normalize(Twist(rng.vec3(), rng.vec3())).xi;
    o.t_wb = rng.pose();
    o.theta_min = -2.0;
    o.theta_max = 2.0;
    o.friction = 0.5;
    const Pose g0 = o.t_wb * Pose(Matrix3::Identity(), rng.vec3());
    Simulator sim;
    try {
      sim.reset(o, g0);
    } catch (const Error&) {
      continue;
    }
    for (int k = 0; k < 20; ++k) {
      const StepResult r = sim.step(sim.grasp_pose() * at(rng.vec3(-0.02, 0.02)));
      const Pose expected = o.t_wb * exp_se3(o.xi, r.theta) * o.t_wb.inverse() * g0;
      CHECK(r.achieved.is_approx(expected, 1e-9));
      if (r.moved && r.theta > o.theta_min && r.theta < o.theta_max) {
        // unclamped moves end at the closest reachable point
        CHECK(std::abs(r.reaction.dot(sim.grasp_velocity())) <
              1e-6 * r.reaction.norm() * sim.grasp_velocity().norm() + 1e-9);
      }
    }
  }
}

TEST_CASE("reversing a command sequence returns to the start without friction") {
  ArticulatedObject o = door();
  o.friction = 0.0;
  o.theta_min = -1.0;
  Simulator sim;
  const Pose g0 = at({0.5, 0, 0});
  sim.reset(o, g0);
  std::vector<Pose> path;
  for (int k = 1; k <= 10; ++k) {
    const double a = 0.05 * k;
    path.push_back(at({0.5 * std::cos(a), 0.5 * std::sin(a), 0}));
  }
  for (const auto& p : path) sim.step(p);
  CHECK(sim.theta() == doctest::Approx(0.5));
  for (auto it = path.rbegin() + 1; it != path.rend(); ++it) sim.step(*it);
  sim.step(g0);
  CHECK(std::abs(sim.theta()) < 1e-12);
  CHECK(sim.grasp_pose().is_approx(g0, 1e-12));
}
