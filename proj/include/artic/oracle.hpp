#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "artic/liegroup.hpp"

namespace artic {

/// One point of a predicted affordance cloud, expressed in the object base frame.
struct FlowPoint {
  Vector3 position = Vector3::Zero();
  bool articulated = true;
  Vector3 flow = Vector3::Zero();       // predicted displacement for the fixed increment
  Vector3 log_sigma = Vector3::Zero();  // per-axis log standard deviation of the flow
};

struct FlowCloud {
  std::vector<FlowPoint> points;

  std::size_t articulated_count() const;
};

/// Rectangular moving panel: center plus two edge directions with extents.
struct Panel {
  Vector3 center = Vector3::Zero();
  Vector3 u_axis = Vector3::UnitY();
  Vector3 w_axis = Vector3::UnitZ();
  double width = 0.5;   // along u_axis
  double height = 0.8;  // along w_axis
};

/// Synthetic stand-in for a flow network. `reported_xi` is what the "network"
/// believes; `true_xi` is kept for reference and for static-point placement.
struct OracleSpec {
  Twist true_xi;
  Twist reported_xi;
  Panel panel;
  int num_points = 1000;
  int num_static_points = 0;
  Vector3 flow_sigma = Vector3::Zero();
  Vector3 log_sigma = Vector3::Constant(-4.0);
  std::uint64_t seed = 1;
};

/// Samples points uniformly on the panel and emits
/// f = exp(reported_xi * 0.05) p - p + N(0, diag(flow_sigma^2)).
/// Static points (mask 0) are placed on a frame just outside the panel.
/// Deterministic for a fixed seed.
FlowCloud generate(const OracleSpec& spec);

/// Text format: header `x y z mask fx fy fz ux uy uz`, one row per point.
/// Throws ParseError (with line number) or InconsistentColumns.
FlowCloud load_flow_cloud(const std::filesystem::path& path);
void save_flow_cloud(const FlowCloud& cloud, const std::filesystem::path& path);

}  // namespace artic
