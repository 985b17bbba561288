#include "artic/screw.hpp"

#include <cmath>

#include "artic/error.hpp"

namespace artic {

std::string_view to_string(JointClass cls) {
  switch (cls) {
    case JointClass::Revolute: return "revolute";
    case JointClass::Prismatic: return "prismatic";
    case JointClass::Helical: return "helical";
  }
  return "unknown";
}

NormalizedTwist normalize(const Twist& xi) {
  const double nv = xi.v.norm();
  const double nw = xi.w.norm();
  if (nv + nw <= 1e-12) {
    throw Error(ErrorKind::DegenerateTwist, "twist has no linear or angular part");
  }
  NormalizedTwist out;
  if (nw >= kPrismaticRatio * (nv + nw)) {
    out.scale = nw;
    out.xi = Twist(xi.v / nw, xi.w / nw);
    const double pitch = out.xi.w.dot(out.xi.v);
    out.joint = std::abs(pitch) > kHelicalPitch ? JointClass::Helical : JointClass::Revolute;
  } else {
    out.scale = nv;
    out.xi = Twist(xi.v / nv, Vector3::Zero());
    out.joint = JointClass::Prismatic;
  }
  return out;
}

JointClass classify(const Twist& xi) { return normalize(xi).joint; }

Vector3 point_velocity(const Twist& xi, const Vector3& c) { return xi.v + xi.w.cross(c); }

double tangent_similarity(std::span<const Vector3> v_gt, std::span<const Vector3> v_est) {
  if (v_gt.size() != v_est.size() || v_gt.empty()) {
    throw Error(ErrorKind::PreconditionViolated,
                "tangent_similarity needs two non-empty sequences of equal length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < v_gt.size(); ++i) {
    const double ng = v_gt[i].norm();
    const double ne = v_est[i].norm();
    if (ng == 0.0 || ne == 0.0) {
      throw Error(ErrorKind::ZeroVector, "zero velocity at sample " + std::to_string(i));
    }
    sum += v_gt[i].dot(v_est[i]) / (ng * ne);
  }
  return sum / static_cast<double>(v_gt.size());
}

}  // namespace artic
