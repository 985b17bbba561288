#include "artic/oracle.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "artic/error.hpp"
#include "artic/factors.hpp"

namespace artic {

std::size_t FlowCloud::articulated_count() const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [](const FlowPoint& p) { return p.articulated; }));
}

FlowCloud generate(const OracleSpec& spec) {
  if (spec.num_points < 1 || spec.num_static_points < 0 || (spec.flow_sigma.array() < 0.0).any()) {
    throw Error(ErrorKind::PreconditionViolated, "oracle spec needs N >= 1 and sigma >= 0");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const Panel& panel = spec.panel;
  const Vector3 u = panel.u_axis.normalized();
  const Vector3 w = panel.w_axis.normalized();
  const Pose step = exp_se3(spec.reported_xi, kAffordanceIncrement);

  FlowCloud cloud;
  cloud.points.reserve(static_cast<std::size_t>(spec.num_points + spec.num_static_points));
  for (int i = 0; i < spec.num_points; ++i) {
    FlowPoint fp;
    fp.position = panel.center + unit(rng) * panel.width * u + unit(rng) * panel.height * w;
    const Vector3 noise(gauss(rng), gauss(rng), gauss(rng));
    fp.flow = step * fp.position - fp.position + spec.flow_sigma.cwiseProduct(noise);
    fp.log_sigma = spec.log_sigma;
    fp.articulated = true;
    cloud.points.push_back(fp);
  }
  // Static frame points: a thin border around the panel, zero flow.
  for (int i = 0; i < spec.num_static_points; ++i) {
    FlowPoint fp;
    const double s = unit(rng);
    const bool vertical_edge = (i % 2) == 0;
    const double margin = 0.55;
    fp.position = vertical_edge
                      ? panel.center + (s > 0 ? margin : -margin) * panel.width * u +
                            unit(rng) * panel.height * w
                      : panel.center + unit(rng) * panel.width * u +
                            (s > 0 ? margin : -margin) * panel.height * w;
    fp.articulated = false;
    fp.log_sigma = spec.log_sigma;
    cloud.points.push_back(fp);
  }
  return cloud;
}

namespace {

constexpr const char* kHeader = "x y z mask fx fy fz ux uy uz";

[[noreturn]] void parse_error(const std::filesystem::path& path, std::size_t line,
                              const std::string& msg) {
  throw Error(ErrorKind::ParseError,
              path.string() + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

FlowCloud load_flow_cloud(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::IoError, "cannot open " + path.string());
  }
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) {
    parse_error(path, 1, "missing header");
  }
  ++line_no;
  {
    std::istringstream hs(line);
    std::vector<std::string> cols;
    for (std::string c; hs >> c;) {
      cols.push_back(c);
    }
    std::istringstream expected(kHeader);
    std::vector<std::string> want;
    for (std::string c; expected >> c;) {
      want.push_back(c);
    }
    if (cols.size() != want.size()) {
      throw Error(ErrorKind::InconsistentColumns,
                  path.string() + ":1: header has " + std::to_string(cols.size()) +
                      " columns, expected " + std::to_string(want.size()));
    }
    if (cols != want) {
      parse_error(path, 1, "unexpected header '" + line + "'");
    }
  }

  FlowCloud cloud;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    for (std::string t; ls >> t;) {
      tokens.push_back(t);
    }
    if (tokens.size() != 10) {
      throw Error(ErrorKind::InconsistentColumns,
                  path.string() + ":" + std::to_string(line_no) + ": expected 10 columns, got " +
                      std::to_string(tokens.size()));
    }
    double v[10];
    for (int i = 0; i < 10; ++i) {
      std::size_t used = 0;
      try {
        v[i] = std::stod(tokens[static_cast<std::size_t>(i)], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tokens[static_cast<std::size_t>(i)].size()) {
        parse_error(path, line_no, "invalid number '" + tokens[static_cast<std::size_t>(i)] + "'");
      }
    }
    if (tokens[3] != "0" && tokens[3] != "1") {
      parse_error(path, line_no, "mask must be 0 or 1, got '" + tokens[3] + "'");
    }
    FlowPoint fp;
    fp.position = Vector3(v[0], v[1], v[2]);
    fp.articulated = tokens[3] == "1";
    fp.flow = Vector3(v[4], v[5], v[6]);
    fp.log_sigma = Vector3(v[7], v[8], v[9]);
    cloud.points.push_back(fp);
  }
  return cloud;
}

void save_flow_cloud(const FlowCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorKind::IoError, "cannot write " + path.string());
  }
  out << kHeader << '\n';
  char buf[64];
  const auto put = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    out << buf;
  };
  for (const auto& p : cloud.points) {
    put(p.position.x()); out << ' ';
    put(p.position.y()); out << ' ';
    put(p.position.z()); out << ' ';
    out << (p.articulated ? 1 : 0) << ' ';
    put(p.flow.x()); out << ' ';
    put(p.flow.y()); out << ' ';
    put(p.flow.z()); out << ' ';
    put(p.log_sigma.x()); out << ' ';
    put(p.log_sigma.y()); out << ' ';
    put(p.log_sigma.z());
    out << '\n';
  }
  if (!out) {
    throw Error(ErrorKind::IoError, "write failed for " + path.string());
  }
}

}  // namespace artic
