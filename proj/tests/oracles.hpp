#pragma once
// Independent reference computations used only by tests.

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "artic/factors.hpp"
#include "artic/liegroup.hpp"

namespace artic::testing {

/// Truncated power series exp(A) = sum_{n<terms} A^n / n!, with scaling and
/// squaring so that the series argument has norm below 0.5.
template <int N>
Eigen::Matrix<double, N, N> matrix_exp_series(const Eigen::Matrix<double, N, N>& a, int terms = 20) {
  int squarings = 0;
  double norm = a.norm();
  while (norm > 0.5) {
    norm *= 0.5;
    ++squarings;
  }
  const Eigen::Matrix<double, N, N> scaled = a / std::pow(2.0, squarings);
  Eigen::Matrix<double, N, N> sum = Eigen::Matrix<double, N, N>::Identity();
  Eigen::Matrix<double, N, N> term = Eigen::Matrix<double, N, N>::Identity();
  for (int n = 1; n < terms; ++n) {
    term = term * scaled / static_cast<double>(n);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) {
    sum = sum * sum;
  }
  return sum;
}

inline Vector3 cross_componentwise(const Vector3& a, const Vector3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine); }
  double normal(double sigma = 1.0) { return std::normal_distribution<double>(0.0, sigma)(engine); }
  Vector3 vec3(double lo = -1.0, double hi = 1.0) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }
  Vector3 unit3() {
    Vector3 v(normal(), normal(), normal());
    return v.normalized();
  }
  Vector6 vec6(double scale = 1.0) {
    Vector6 v;
    for (int i = 0; i < 6; ++i) v[i] = uniform(-scale, scale);
    return v;
  }
  /// Random pose with rotation angle below max_angle.
  Pose pose(double max_angle = 3.0, double max_translation = 1.0) {
    const Matrix3 r = Eigen::AngleAxisd(uniform(0.0, max_angle), unit3()).toRotationMatrix();
    return {r, vec3(-max_translation, max_translation)};
  }
};

/// Central finite-difference Jacobians of an unwhitened factor residual,
/// one block per key, perturbing each variable through Values::retract.
inline std::vector<Eigen::MatrixXd> numeric_jacobians(const Factor& factor, const Values& values,
                                                      double h = 1e-6) {
  std::vector<Eigen::MatrixXd> out;
  for (const auto& key : factor.keys()) {
    Eigen::MatrixXd j(factor.dim(), key.dim());
    for (int i = 0; i < key.dim(); ++i) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(key.dim());
      d[i] = h;
      Values plus = values;
      Values minus = values;
      plus.retract(key, d);
      minus.retract(key, -d);
      j.col(i) = (factor.residual(plus) - factor.residual(minus)) / (2.0 * h);
    }
    out.push_back(j);
  }
  return out;
}

/// max |A - B| / max(1, max |B|): relative error robust to tiny Jacobians.
inline double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

/// Fresh directory under the system temp path, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           (tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace artic::testing
