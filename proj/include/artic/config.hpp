#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "artic/graph.hpp"
#include "artic/oracle.hpp"
#include "artic/screw.hpp"

namespace artic {

enum class MotionMode { FreeFlyer, Chain };

/// Ground-truth object and grasp, world frame.
struct ObjectConfig {
  JointClass joint = JointClass::Revolute;
  Vector3 axis = Vector3::UnitZ();  // rotation axis, or motion direction for prismatic
  Vector3 point = Vector3::Zero();  // a point on the rotation axis
  double pitch = 0.0;               // m/rad, helical only
  double lower = 0.0;
  double upper = 1.5707963267948966;
  double friction = 2.0;     // N
  double stiffness = 1000.0;  // N/m
  Vector3 grasp = Vector3(0.0, 0.5, 0.0);
};

/// Synthetic flow source. The reported twist is given in the world frame.
struct OracleConfig {
  Twist reported;
  Panel panel;
  int num_points = 1000;
  int num_static_points = 0;
  Vector3 flow_sigma = Vector3::Zero();
  Vector3 log_sigma = Vector3::Constant(-4.0);
};

struct MotionConfig {
  double gv = 0.1;
  double dt = 0.1;
  double goal_lower = 0.0;
  double goal_upper = 1.8;
  MotionMode mode = MotionMode::FreeFlyer;
  Vector3 chain_base = Vector3(-0.6, 0.5, -0.6);
  bool closing = false;
};

struct ScenarioConfig {
  std::string name = "scenario";
  ObjectConfig object;
  OracleConfig oracle;
  GraphConfig graph;
  MotionConfig motion;
  double success_fraction = 0.9;
  int max_steps = 600;
  std::uint64_t seed = 1;
  double measurement_noise = 5e-4;  // std-dev of simulated pose measurements (m, rad)
};

/// Checks value ranges; throws ConfigError.
void validate(const ScenarioConfig& config);

/// Reads an INI-style file with sections [object], [oracle], [thresholds],
/// [motion], [noise] and [run]. Unknown sections or keys, malformed values
/// and out-of-range values throw ConfigError (message carries the line).
ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const std::string& text, const std::string& source = "<string>");

/// Writes every key so that parse_config(format_config(c)) reproduces c.
std::string format_config(const ScenarioConfig& config);

}  // namespace artic
