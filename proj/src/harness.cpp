#include "artic/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "artic/error.hpp"
#include "artic/motion.hpp"

namespace artic {

ArticulatedObject make_object(const ObjectConfig& o) {
  ArticulatedObject obj;
  const Vector3 axis = o.axis.normalized();
  if (o.joint == JointClass::Prismatic) {
    obj.xi = Twist(axis, Vector3::Zero());
  } else {
    const double pitch = o.joint == JointClass::Helical ? o.pitch : 0.0;
    obj.xi = Twist(-axis.cross(o.point) + pitch * axis, axis);
  }
  obj.t_wb = Pose::identity();
  obj.theta_min = o.lower;
  obj.theta_max = o.upper;
  obj.friction = o.friction;
  return obj;
}

Pose grasp_frame(const ScenarioConfig& config) { return Pose::from_translation(config.object.grasp); }

OracleSpec make_oracle_spec(const ScenarioConfig& config) {
  OracleSpec spec;
  spec.true_xi = make_object(config.object).world_twist();
  spec.reported_xi = config.oracle.reported;
  spec.panel = config.oracle.panel;
  spec.num_points = config.oracle.num_points;
  spec.num_static_points = config.oracle.num_static_points;
  spec.flow_sigma = config.oracle.flow_sigma;
  spec.log_sigma = config.oracle.log_sigma;
  spec.seed = config.seed * 2654435761ULL + 17ULL;
  return spec;
}

FlowCloud to_frame(const FlowCloud& cloud, const Pose& frame) {
  const Pose inv = frame.inverse();
  FlowCloud out = cloud;
  for (auto& p : out.points) {
    p.position = inv * p.position;
    p.flow = inv.rotation() * p.flow;
  }
  return out;
}

namespace {

struct Sample {
  Vector3 point;
  Vector3 velocity;
};

double evaluate_similarity(const std::vector<Sample>& samples, const Twist& xi_world,
                           double direction) {
  std::vector<Vector3> gt;
  std::vector<Vector3> est;
  for (const auto& s : samples) {
    const Vector3 v = direction * point_velocity(xi_world, s.point);
    if (v.norm() == 0.0 || s.velocity.norm() == 0.0) {
      continue;
    }
    gt.push_back(s.velocity);
    est.push_back(v);
  }
  if (gt.empty()) {
    return 0.0;
  }
  return tangent_similarity(gt, est);
}

}  // namespace

double grasp_speed(const Twist& xi) { return xi.v.norm(); }

Twist motion_twist(const Twist& xi) {
  const double speed = grasp_speed(xi);
  if (speed > 1e-9) {
    return xi * (1.0 / speed);
  }
  return normalize(xi).xi;
}

RunResult run_scenario(const ScenarioConfig& config) {
  RunResult result;
  RunSummary& summary = result.summary;
  summary.name = config.name;
  std::vector<double> opt_ms;

  try {
    validate(config);
    const ArticulatedObject object = make_object(config.object);
    const Pose grasp0 = grasp_frame(config);
    result.true_xi = normalize(transform_twist(grasp0.inverse(), object.world_twist())).xi;

    Simulator sim;
    sim.reset(object, grasp0, config.object.stiffness);

    const FlowCloud cloud = to_frame(generate(make_oracle_spec(config)), grasp0);
    auto graph = std::make_shared<FactorGraph>(config.graph, seed_from_cloud(cloud), grasp0);
    result.graph = graph;
    graph->add_affordance_cloud(cloud);

    std::mt19937_64 rng(config.seed ^ 0xA5A5A5A55A5A5A5AULL);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<Sample> samples{{grasp0.translation(), sim.grasp_velocity()}};
    double theta_gt_start = sim.theta();
    int step = 0;

    OpeningSchedule schedule;
    schedule.gv = config.motion.gv;
    schedule.dt = config.motion.dt;
    schedule.lower = config.motion.goal_lower;
    schedule.upper = config.motion.goal_upper;
    schedule.theta = std::clamp(0.0, schedule.lower, schedule.upper);

    const auto solve = [&] {
      const auto t0 = std::chrono::steady_clock::now();
      const MarginalReport rep = graph->optimize();
      const auto t1 = std::chrono::steady_clock::now();
      opt_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      result.factor_counts.push_back(graph->factors().size());

      const Values& v = graph->values();
      TraceRecord rec;
      rec.step = step;
      rec.opt_index = static_cast<int>(result.trace.size());
      rec.xi = v.xi.vector();
      rec.theta = v.theta.back();
      rec.sigma3 = 3.0 * rep.sigma_xi;
      rec.cost = rep.cost;
      rec.n_kin = graph->count(FactorType::Kinematic);
      rec.n_force = graph->count(FactorType::Force);
      const double dir = v.theta.back() - v.theta.front() >= 0.0 ? 1.0 : -1.0;
      rec.tangent_sim = evaluate_similarity(samples, transform_twist(grasp0, v.xi), dir);
      try {
        rec.joint = classify(v.xi);
      } catch (const Error&) {
        rec.joint = JointClass::Prismatic;
      }
      result.trace.push_back(rec);

      // re-anchor the goal at the estimated configuration
      schedule.theta = std::clamp(grasp_speed(v.xi) * (v.theta.back() - v.theta.front()),
                                  schedule.lower, schedule.upper);
      schedule.sign = 1.0;
    };

    solve();

    ChainModel chain;
    Eigen::VectorXd q;
    IkParams ik;
    if (config.motion.mode == MotionMode::Chain) {
      chain = default_chain(Pose::from_translation(config.motion.chain_base));
      q = Eigen::VectorXd::Zero(chain.joints());
      q << 0.0, 0.6, 0.0, -1.2, 0.0, 0.6, 0.0;
      IkParams first = ik;
      first.max_iterations = 500;
      q = solve_ik(chain, q, grasp0, first).q;
    }

    bool opened = false;
    for (step = 1; step <= config.max_steps; ++step) {
      const double theta_goal = advance(schedule);
      if (!config.motion.closing && schedule.sign < 0.0) {
        schedule.sign = 1.0;
        schedule.theta = schedule.upper;
      }
      Pose command = goal_pose(motion_twist(graph->values().xi), theta_goal, grasp0);
      if (config.motion.mode == MotionMode::Chain) {
        q = solve_ik(chain, q, command, ik).q;
        command = chain.forward(q);
      }
      const StepResult r = sim.step(command);
      if (config.motion.mode == MotionMode::Chain) {
        // compliant arm settles at the constrained pose
        q = solve_ik(chain, q, r.achieved, ik).q;
      }

      if (r.moved) {
        Vector6 noise;
        for (int i = 0; i < 6; ++i) noise[i] = gauss(rng) * config.measurement_noise;
        const Pose measured = r.achieved * expmap(noise);
        if (graph->maybe_add_kinematic(measured, grasp0)) {
          const double sgn = sim.theta() - theta_gt_start >= 0.0 ? 1.0 : -1.0;
          samples.push_back({r.achieved.translation(), sgn * sim.grasp_velocity()});
        }
      } else if (r.reaction.norm() > config.graph.force_threshold && graph->values().pose_a.size() <= 1) {
        graph->add_force_factor({r.reaction, r.achieved.translation(), summary.n_force_factors});
        ++summary.n_force_factors;
      }
      if (graph->should_reoptimize()) {
        solve();
      }
      if (sim.opening_fraction() >= config.success_fraction) {
        opened = true;
        break;
      }
    }
    summary.steps = std::min(step, config.max_steps);
    summary.success = opened;
    summary.opening_fraction = sim.opening_fraction();
  } catch (const Error& e) {
    summary.error = e.what();
    summary.success = false;
  } catch (const std::exception& e) {
    summary.error = e.what();
    summary.success = false;
  }
  summary.n_optimizations = static_cast<int>(opt_ms.size());
  if (!opt_ms.empty()) {
    double sum = 0.0;
    for (double t : opt_ms) sum += t;
    summary.avg_opt_ms = sum / static_cast<double>(opt_ms.size());
    summary.worst_opt_ms = *std::max_element(opt_ms.begin(), opt_ms.end());
  }
  return result;
}

BatchReport run_batch(const std::vector<ScenarioConfig>& configs, int parallelism) {
  BatchReport report;
  report.summaries.resize(configs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      report.summaries[i] = run_scenario(configs[i]).summary;
    }
  };
  const int threads = std::max(1, std::min<int>(parallelism, static_cast<int>(configs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  int ok = 0;
  int opt_count = 0;
  double opt_sum = 0.0;
  for (const auto& s : report.summaries) {
    ok += s.success ? 1 : 0;
    opt_sum += s.avg_opt_ms * s.n_optimizations;
    opt_count += s.n_optimizations;
    report.worst_opt_ms = std::max(report.worst_opt_ms, s.worst_opt_ms);
  }
  if (!configs.empty()) report.success_rate = static_cast<double>(ok) / static_cast<double>(configs.size());
  if (opt_count > 0) report.avg_opt_ms = opt_sum / opt_count;
  return report;
}

std::vector<ScenarioConfig> canonical_scenarios(std::uint64_t seed) {
  std::vector<ScenarioConfig> out;

  ScenarioConfig door;
  door.seed = seed;
  door.oracle.panel.center = Vector3(0.0, 0.3, 0.0);
  door.oracle.panel.u_axis = Vector3::UnitY();
  door.oracle.panel.w_axis = Vector3::UnitZ();
  door.oracle.panel.width = 0.6;
  door.oracle.panel.height = 0.8;
  door.oracle.reported = Twist(Vector3(-1.0, 0.0, 0.0), Vector3::Zero());
  door.oracle.log_sigma = Vector3::Constant(-4.0);
  door.oracle.flow_sigma = Vector3::Constant(0.002);
  door.object.joint = JointClass::Revolute;
  door.object.lower = 0.0;
  door.object.upper = 1.5707963267948966;
  door.object.friction = 2.0;
  door.motion.goal_upper = 1.2;

  ScenarioConfig left = door;
  left.name = "left_revolute";
  left.object.axis = Vector3::UnitZ();
  left.object.point = Vector3::Zero();
  left.object.grasp = Vector3(0.0, 0.5, 0.0);
  out.push_back(left);

  ScenarioConfig right = door;
  right.name = "right_revolute";
  right.object.axis = -Vector3::UnitZ();
  right.object.point = Vector3(0.0, 0.6, 0.0);
  right.object.grasp = Vector3(0.0, 0.1, 0.0);
  out.push_back(right);

  ScenarioConfig drawer;
  drawer.name = "drawer";
  drawer.seed = seed;
  drawer.object.joint = JointClass::Prismatic;
  drawer.object.axis = Vector3(-1.0, 0.0, 0.0);
  drawer.object.lower = 0.0;
  drawer.object.upper = 0.35;
  drawer.object.friction = 2.0;
  drawer.object.grasp = Vector3(0.0, 0.3, 0.0);
  drawer.oracle.panel.center = Vector3(0.0, 0.3, 0.0);
  drawer.oracle.panel.width = 0.5;
  drawer.oracle.panel.height = 0.2;
  drawer.oracle.reported = Twist(Vector3(-1.0, 0.0, 0.0), Vector3::Zero());
  drawer.oracle.flow_sigma = Vector3::Constant(0.002);
  drawer.motion.goal_upper = 0.5;
  out.push_back(drawer);

  ScenarioConfig slide;
  slide.name = "sliding_door";
  slide.seed = seed;
  slide.object.joint = JointClass::Prismatic;
  slide.object.axis = Vector3(0.0, 1.0, 0.0);
  slide.object.lower = 0.0;
  slide.object.upper = 0.4;
  slide.object.friction = 5.0;
  slide.object.grasp = Vector3(0.0, 0.3, 0.0);
  slide.oracle.panel.center = Vector3(0.0, 0.3, 0.0);
  slide.oracle.panel.width = 0.6;
  slide.oracle.panel.height = 0.8;
  slide.oracle.reported = Twist(Vector3(-1.0, 0.35, 0.0).normalized(), Vector3::Zero());
  slide.oracle.log_sigma = Vector3(-2.0, -3.5, -5.0);
  slide.oracle.flow_sigma = Vector3::Constant(0.002);
  slide.motion.goal_upper = 0.5;
  out.push_back(slide);
  return out;
}

std::string format_trace(const std::vector<TraceRecord>& trace) {
  std::ostringstream o;
  o << "step,opt_index,xi_vx,xi_vy,xi_vz,xi_wx,xi_wy,xi_wz,theta,"
       "sigma3_vx,sigma3_vy,sigma3_vz,sigma3_wx,sigma3_wy,sigma3_wz,"
       "cost,tangent_sim,n_kin,n_force,class\n";
  char buf[40];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    o << buf << ',';
  };
  for (const auto& r : trace) {
    o << r.step << ',' << r.opt_index << ',';
    for (int i = 0; i < 6; ++i) put(r.xi[i]);
    put(r.theta);
    for (int i = 0; i < 6; ++i) put(r.sigma3[i]);
    put(r.cost);
    put(r.tangent_sim);
    o << r.n_kin << ',' << r.n_force << ',' << to_string(r.joint) << '\n';
  }
  return o.str();
}

void export_trace(const std::vector<TraceRecord>& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::IoError, "cannot write " + path.string());
  }
  out << format_trace(trace);
  if (!out) {
    throw Error(ErrorKind::IoError, "write failed for " + path.string());
  }
}

std::vector<TraceRecord> load_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::IoError, "cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::ParseError, path.string() + ":1: missing header");
  }
  std::vector<TraceRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    if (cols.size() != 20) {
      throw Error(ErrorKind::InconsistentColumns,
                  path.string() + ":" + std::to_string(line_no) + ": expected 20 columns");
    }
    try {
      TraceRecord r;
      r.step = std::stoi(cols[0]);
      r.opt_index = std::stoi(cols[1]);
      for (int i = 0; i < 6; ++i) r.xi[i] = std::stod(cols[2 + i]);
      r.theta = std::stod(cols[8]);
      for (int i = 0; i < 6; ++i) r.sigma3[i] = std::stod(cols[9 + i]);
      r.cost = std::stod(cols[15]);
      r.tangent_sim = std::stod(cols[16]);
      r.n_kin = std::stoi(cols[17]);
      r.n_force = std::stoi(cols[18]);
      const std::string& cls = cols[19];
      if (cls == "revolute") r.joint = JointClass::Revolute;
      else if (cls == "prismatic") r.joint = JointClass::Prismatic;
      else if (cls == "helical") r.joint = JointClass::Helical;
      else throw std::invalid_argument("class");
      out.push_back(r);
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(line_no) + ": bad value");
    }
  }
  return out;
}

namespace {

nlohmann::json summary_json(const RunSummary& s) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["name"] = s.name;
  j["success"] = s.success;
  j["opening_fraction"] = s.opening_fraction;
  j["n_force_factors"] = s.n_force_factors;
  j["n_optimizations"] = s.n_optimizations;
  j["avg_opt_ms"] = s.avg_opt_ms;
  j["worst_opt_ms"] = s.worst_opt_ms;
  j["steps"] = s.steps;
  if (!s.error.empty()) j["error"] = s.error;
  return j;
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorKind::IoError, "cannot write " + path.string());
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw Error(ErrorKind::IoError, "write failed for " + path.string());
  }
}

}  // namespace

void export_summary(const RunSummary& summary, const std::filesystem::path& path) {
  write_json(summary_json(summary), path);
}

void export_batch(const BatchReport& report, const std::filesystem::path& path) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["success_rate"] = report.success_rate;
  j["avg_opt_ms"] = report.avg_opt_ms;
  j["worst_opt_ms"] = report.worst_opt_ms;
  j["scenarios"] = nlohmann::json::array();
  for (const auto& s : report.summaries) j["scenarios"].push_back(summary_json(s));
  write_json(j, path);
}

}  // namespace artic
