#include "artic/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "artic/error.hpp"

namespace artic {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

[[noreturn]] void fail(const std::string& source, int line, const std::string& msg) {
  throw Error(ErrorKind::ConfigError, source + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

double to_double(const std::string& token, const std::string& source, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != token.size() || !std::isfinite(v)) {
    fail(source, line, "invalid number '" + token + "'");
  }
  return v;
}

std::vector<double> to_list(const std::string& raw, const std::string& source, int line) {
  std::string s = raw;
  if (!s.empty() && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  for (char& c : s) {
    if (c == ',') c = ' ';
  }
  std::istringstream is(s);
  std::vector<double> out;
  for (std::string t; is >> t;) out.push_back(to_double(t, source, line));
  return out;
}

using Setter = std::function<void(const Entry&)>;

class Binder {
 public:
  explicit Binder(std::string source) : source_(std::move(source)) {}

  void real(const std::string& key, double& out) {
    setters_[key] = [this, &out](const Entry& e) { out = to_double(e.value, source_, e.line); };
  }
  void integer(const std::string& key, int& out) {
    setters_[key] = [this, &out](const Entry& e) {
      const double v = to_double(e.value, source_, e.line);
      if (v != std::floor(v) || std::abs(v) > 1e9) fail(source_, e.line, "expected an integer");
      out = static_cast<int>(v);
    };
  }
  void seed(const std::string& key, std::uint64_t& out) {
    setters_[key] = [this, &out](const Entry& e) {
      std::size_t used = 0;
      try {
        out = std::stoull(e.value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != e.value.size()) fail(source_, e.line, "invalid seed '" + e.value + "'");
    };
  }
  void vec3(const std::string& key, Vector3& out) {
    setters_[key] = [this, &out](const Entry& e) {
      const auto v = to_list(e.value, source_, e.line);
      if (v.size() != 3) fail(source_, e.line, "expected 3 numbers");
      out = Vector3(v[0], v[1], v[2]);
    };
  }
  void boolean(const std::string& key, bool& out) {
    setters_[key] = [this, &out](const Entry& e) {
      if (e.value == "true") out = true;
      else if (e.value == "false") out = false;
      else fail(source_, e.line, "expected true or false");
    };
  }
  void text(const std::string& key, std::string& out) {
    setters_[key] = [&out](const Entry& e) { out = unquote(e.value); };
  }
  void custom(const std::string& key, Setter s) { setters_[key] = std::move(s); }

  void apply(const std::string& section, const std::map<std::string, Entry>& entries) {
    for (const auto& [key, entry] : entries) {
      const auto it = setters_.find(key);
      if (it == setters_.end()) {
        fail(source_, entry.line, "unknown key '" + key + "' in [" + section + "]");
      }
      it->second(entry);
    }
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::map<std::string, Setter> setters_;
};

// shortest text that parses back to the same double
std::string fmt(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt(const Vector3& v) { return fmt(v.x()) + " " + fmt(v.y()) + " " + fmt(v.z()); }

}  // namespace

void validate(const ScenarioConfig& c) {
  const auto check = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::ConfigError, what);
  };
  check(c.object.upper >= c.object.lower, "object.upper must be >= object.lower");
  check(c.object.friction >= 0.0, "object.friction must be >= 0");
  check(c.object.stiffness > 0.0, "object.stiffness must be > 0");
  check(c.object.axis.norm() > 1e-12, "object.axis must be non-zero");
  check(c.oracle.num_points >= 1, "oracle.num_points must be >= 1");
  check(c.oracle.num_static_points >= 0, "oracle.num_static_points must be >= 0");
  check((c.oracle.flow_sigma.array() >= 0.0).all(), "oracle.flow_sigma must be >= 0");
  check(c.oracle.panel.width > 0.0 && c.oracle.panel.height > 0.0, "panel extents must be > 0");
  check(c.graph.force_threshold > 0.0, "thresholds.force must be > 0");
  check(c.graph.d_translation > 0.0, "thresholds.d_translation must be > 0");
  check(c.graph.d_rotation > 0.0, "thresholds.d_rotation_deg must be > 0");
  check(c.graph.reoptimize_count > 0, "thresholds.reoptimize_count must be > 0");
  check(c.graph.prior_variance > 0.0 && c.graph.articulation_variance > 0.0 &&
            c.graph.kinematic_sigma > 0.0 && c.graph.force_variance > 0.0,
        "noise parameters must be > 0");
  check(c.measurement_noise >= 0.0, "noise.measurement must be >= 0");
  check(c.motion.gv >= 0.0 && c.motion.dt > 0.0, "motion.gv must be >= 0 and motion.dt > 0");
  check(c.motion.goal_upper > c.motion.goal_lower, "motion.goal_upper must exceed goal_lower");
  check(c.success_fraction > 0.0 && c.success_fraction <= 1.0, "run.success_fraction must be in (0, 1]");
  check(c.max_steps > 0, "run.max_steps must be > 0");
}

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
  std::map<std::string, std::map<std::string, Entry>> sections;
  std::string current;
  std::istringstream in(text);
  int line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(source, line_no, "malformed section header");
      current = trim(line.substr(1, line.size() - 2));
      if (current != "object" && current != "oracle" && current != "thresholds" &&
          current != "motion" && current != "noise" && current != "run") {
        fail(source, line_no, "unknown section [" + current + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(source, line_no, "expected key = value");
    if (current.empty()) fail(source, line_no, "key outside of a section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) fail(source, line_no, "empty key or value");
    auto& sec = sections[current];
    if (sec.count(key)) fail(source, line_no, "duplicate key '" + key + "'");
    sec[key] = {value, line_no};
  }

  ScenarioConfig c;
  {
    Binder b(source);
    b.custom("joint", [&](const Entry& e) {
      const std::string v = unquote(e.value);
      if (v == "revolute") c.object.joint = JointClass::Revolute;
      else if (v == "prismatic") c.object.joint = JointClass::Prismatic;
      else if (v == "helical") c.object.joint = JointClass::Helical;
      else fail(source, e.line, "joint must be revolute, prismatic or helical");
    });
    b.vec3("axis", c.object.axis);
    b.vec3("point", c.object.point);
    b.real("pitch", c.object.pitch);
    b.real("lower", c.object.lower);
    b.real("upper", c.object.upper);
    b.real("friction", c.object.friction);
    b.real("stiffness", c.object.stiffness);
    b.vec3("grasp", c.object.grasp);
    b.apply("object", sections["object"]);
  }
  {
    Binder b(source);
    b.vec3("reported_v", c.oracle.reported.v);
    b.vec3("reported_w", c.oracle.reported.w);
    b.integer("num_points", c.oracle.num_points);
    b.integer("num_static_points", c.oracle.num_static_points);
    b.vec3("flow_sigma", c.oracle.flow_sigma);
    b.vec3("log_sigma", c.oracle.log_sigma);
    b.vec3("panel_center", c.oracle.panel.center);
    b.vec3("panel_u", c.oracle.panel.u_axis);
    b.vec3("panel_w", c.oracle.panel.w_axis);
    b.real("panel_width", c.oracle.panel.width);
    b.real("panel_height", c.oracle.panel.height);
    b.apply("oracle", sections["oracle"]);
  }
  {
    Binder b(source);
    b.real("force", c.graph.force_threshold);
    b.real("d_translation", c.graph.d_translation);
    double deg = c.graph.d_rotation * 180.0 / std::numbers::pi;
    b.real("d_rotation_deg", deg);
    b.integer("reoptimize_count", c.graph.reoptimize_count);
    b.apply("thresholds", sections["thresholds"]);
    c.graph.d_rotation = deg * std::numbers::pi / 180.0;
  }
  {
    Binder b(source);
    b.real("gv", c.motion.gv);
    b.real("dt", c.motion.dt);
    b.real("goal_lower", c.motion.goal_lower);
    b.real("goal_upper", c.motion.goal_upper);
    b.custom("mode", [&](const Entry& e) {
      const std::string v = unquote(e.value);
      if (v == "free-flyer") c.motion.mode = MotionMode::FreeFlyer;
      else if (v == "chain") c.motion.mode = MotionMode::Chain;
      else fail(source, e.line, "mode must be free-flyer or chain");
    });
    b.vec3("chain_base", c.motion.chain_base);
    b.boolean("closing", c.motion.closing);
    b.apply("motion", sections["motion"]);
  }
  {
    Binder b(source);
    b.real("prior_variance", c.graph.prior_variance);
    b.real("articulation_variance", c.graph.articulation_variance);
    b.real("kinematic_sigma", c.graph.kinematic_sigma);
    b.real("force_variance", c.graph.force_variance);
    b.real("measurement", c.measurement_noise);
    b.apply("noise", sections["noise"]);
  }
  {
    Binder b(source);
    b.text("name", c.name);
    b.seed("seed", c.seed);
    b.integer("max_steps", c.max_steps);
    b.real("success_fraction", c.success_fraction);
    b.integer("lm_max_iterations", c.graph.lm.max_iterations);
    b.apply("run", sections["run"]);
  }
  validate(c);
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::IoError, "cannot open " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  ScenarioConfig c = parse_config(ss.str(), path.string());
  return c;
}

std::string format_config(const ScenarioConfig& c) {
  std::ostringstream o;
  o << "[run]\n"
    << "name = \"" << c.name << "\"\n"
    << "seed = " << c.seed << "\n"
    << "max_steps = " << c.max_steps << "\n"
    << "success_fraction = " << fmt(c.success_fraction) << "\n"
    << "lm_max_iterations = " << c.graph.lm.max_iterations << "\n\n";
  o << "[object]\n"
    << "joint = " << to_string(c.object.joint) << "\n"
    << "axis = " << fmt(c.object.axis) << "\n"
    << "point = " << fmt(c.object.point) << "\n"
    << "pitch = " << fmt(c.object.pitch) << "\n"
    << "lower = " << fmt(c.object.lower) << "\n"
    << "upper = " << fmt(c.object.upper) << "\n"
    << "friction = " << fmt(c.object.friction) << "\n"
    << "stiffness = " << fmt(c.object.stiffness) << "\n"
    << "grasp = " << fmt(c.object.grasp) << "\n\n";
  o << "[oracle]\n"
    << "reported_v = " << fmt(c.oracle.reported.v) << "\n"
    << "reported_w = " << fmt(c.oracle.reported.w) << "\n"
    << "num_points = " << c.oracle.num_points << "\n"
    << "num_static_points = " << c.oracle.num_static_points << "\n"
    << "flow_sigma = " << fmt(c.oracle.flow_sigma) << "\n"
    << "log_sigma = " << fmt(c.oracle.log_sigma) << "\n"
    << "panel_center = " << fmt(c.oracle.panel.center) << "\n"
    << "panel_u = " << fmt(c.oracle.panel.u_axis) << "\n"
    << "panel_w = " << fmt(c.oracle.panel.w_axis) << "\n"
    << "panel_width = " << fmt(c.oracle.panel.width) << "\n"
    << "panel_height = " << fmt(c.oracle.panel.height) << "\n\n";
  o << "[thresholds]\n"
    << "force = " << fmt(c.graph.force_threshold) << "\n"
    << "d_translation = " << fmt(c.graph.d_translation) << "\n"
    << "d_rotation_deg = " << fmt(c.graph.d_rotation * 180.0 / std::numbers::pi) << "\n"
    << "reoptimize_count = " << c.graph.reoptimize_count << "\n\n";
  o << "[motion]\n"
    << "gv = " << fmt(c.motion.gv) << "\n"
    << "dt = " << fmt(c.motion.dt) << "\n"
    << "goal_lower = " << fmt(c.motion.goal_lower) << "\n"
    << "goal_upper = " << fmt(c.motion.goal_upper) << "\n"
    << "mode = " << (c.motion.mode == MotionMode::Chain ? "chain" : "free-flyer") << "\n"
    << "chain_base = " << fmt(c.motion.chain_base) << "\n"
    << "closing = " << (c.motion.closing ? "true" : "false") << "\n\n";
  o << "[noise]\n"
    << "prior_variance = " << fmt(c.graph.prior_variance) << "\n"
    << "articulation_variance = " << fmt(c.graph.articulation_variance) << "\n"
    << "kinematic_sigma = " << fmt(c.graph.kinematic_sigma) << "\n"
    << "force_variance = " << fmt(c.graph.force_variance) << "\n"
    << "measurement = " << fmt(c.measurement_noise) << "\n";
  return o.str();
}

}  // namespace artic
