#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "artic/config.hpp"
#include "artic/graph.hpp"
#include "artic/sim.hpp"

namespace artic {

/// One row per optimize() call.
struct TraceRecord {
  int step = 0;       // control step at which the solve happened (0 = affordance only)
  int opt_index = 0;  // 0-based solve counter
  Vector6 xi = Vector6::Zero();
  double theta = 0.0;  // latest theta estimate
  Vector6 sigma3 = Vector6::Zero();
  double cost = 0.0;
  double tangent_sim = 0.0;
  int n_kin = 0;
  int n_force = 0;
  JointClass joint = JointClass::Revolute;
};

struct RunSummary {
  std::string name;
  bool success = false;
  double opening_fraction = 0.0;
  int n_force_factors = 0;
  int n_optimizations = 0;
  double avg_opt_ms = 0.0;
  double worst_opt_ms = 0.0;
  int steps = 0;
  std::string error;  // empty unless the run aborted
};

struct RunResult {
  RunSummary summary;
  std::vector<TraceRecord> trace;
  /// Final graph; its factor list is append-only, so `factor_counts[i]`
  /// reproduces the factor set seen by solve i.
  std::shared_ptr<const FactorGraph> graph;
  std::vector<std::size_t> factor_counts;
  /// Ground-truth twist in the graph's base frame, normalized.
  Twist true_xi;
};

/// Object ground truth (world frame) built from the config.
ArticulatedObject make_object(const ObjectConfig& object);

/// Initial grasp pose: config grasp point, identity orientation. This is the
/// base frame of the estimator.
Pose grasp_frame(const ScenarioConfig& config);

/// Oracle spec for the scenario, world frame, seeded from the run seed.
OracleSpec make_oracle_spec(const ScenarioConfig& config);

/// Re-expresses a world-frame cloud in `frame`.
FlowCloud to_frame(const FlowCloud& cloud, const Pose& frame);

/// Speed of the grasp point (origin of the estimator frame) per unit theta.
double grasp_speed(const Twist& xi);

/// Twist rescaled to unit grasp-point speed, so that goal increments are
/// metres of grasp travel for every joint type. Falls back to normalize()
/// when the grasp point lies on the estimated axis.
Twist motion_twist(const Twist& xi);

/// Closed-loop opening attempt. Module errors end the run with
/// `summary.error` set instead of propagating.
RunResult run_scenario(const ScenarioConfig& config);

struct BatchReport {
  std::vector<RunSummary> summaries;
  double success_rate = 0.0;
  double avg_opt_ms = 0.0;
  double worst_opt_ms = 0.0;
};

/// Runs scenarios on up to `parallelism` threads; results keep input order.
BatchReport run_batch(const std::vector<ScenarioConfig>& configs, int parallelism = 1);

/// Left/right-hinged doors with a prismatic pull prior, a drawer with the
/// correct prior and a sliding door with a pull-back prior.
std::vector<ScenarioConfig> canonical_scenarios(std::uint64_t seed = 1);

void export_trace(const std::vector<TraceRecord>& trace, const std::filesystem::path& path);
std::string format_trace(const std::vector<TraceRecord>& trace);
std::vector<TraceRecord> load_trace_csv(const std::filesystem::path& path);

void export_summary(const RunSummary& summary, const std::filesystem::path& path);
void export_batch(const BatchReport& report, const std::filesystem::path& path);

}  // namespace artic
