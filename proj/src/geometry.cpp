#include "pcr/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace pcr {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;
constexpr double kRadToDeg = 180.0 / kPi;
}  // namespace

Eigen::Matrix4d RigidTransform::homogeneous() const {
  Eigen::Matrix4d h = Eigen::Matrix4d::Identity();
  h.topLeftCorner<3, 3>() = rotation;
  h.topRightCorner<3, 1>() = translation;
  return h;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

Quaternion quat_normalize(const Eigen::Vector4d& q_raw) {
  const double norm = q_raw.norm();
  if (norm < 1e-12) {
    return Quaternion{};
  }
  return Quaternion{q_raw[0] / norm, q_raw[1] / norm, q_raw[2] / norm, q_raw[3] / norm};
}

Eigen::Matrix3d quat_to_rotmat(const Quaternion& q) {
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

RigidTransform pose7_to_transform(const Pose7& p) {
  RigidTransform t;
  t.rotation = quat_to_rotmat(quat_normalize(p.q_raw));
  t.translation = p.t;
  return t;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

Eigen::Vector3d apply_transform(const RigidTransform& t, const Eigen::Vector3d& x) {
  return t.rotation * x + t.translation;
}

PointCloud apply_transform(const RigidTransform& t, const PointCloud& cloud) {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) {
    out.points.push_back(t.rotation * p + t.translation);
  }
  return out;
}

RigidTransform random_transform(Rng& rng, double angle_range_deg, double trans_range) {
  const double range = angle_range_deg * kDegToRad;
  const double az = rng.uniform(-range, range);
  const double ay = rng.uniform(-range, range);
  const double ax = rng.uniform(-range, range);
  RigidTransform t;
  t.rotation = euler_zyx_to_rotmat(az, ay, ax);
  for (int i = 0; i < 3; ++i) {
    t.translation[i] = rng.uniform(-trans_range, trans_range);
  }
  return t;
}

double rotation_error_deg(const RigidTransform& est, const RigidTransform& gt) {
  const Eigen::Matrix3d rel = est.rotation * gt.rotation.transpose();
  // atan2 form of the axis-angle magnitude: |axis| = 2 sin(theta) and
  // trace - 1 = 2 cos(theta). Equivalent to acos((trace-1)/2) but keeps
  // full precision near 0 and 180 degrees.
  const Eigen::Vector3d axis(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0),
                             rel(1, 0) - rel(0, 1));
  return std::atan2(axis.norm(), rel.trace() - 1.0) * kRadToDeg;
}

double translation_error(const RigidTransform& est, const RigidTransform& gt) {
  return (est.translation - gt.translation).norm();
}

double convergence_delta(const RigidTransform& curr, const RigidTransform& prev) {
  const Eigen::Matrix4d rel = curr.homogeneous() * prev.inverse().homogeneous();
  return (rel - Eigen::Matrix4d::Identity()).norm();
}

Eigen::Matrix3d euler_zyx_to_rotmat(double z_rad, double y_rad, double x_rad) {
  const double cz = std::cos(z_rad), sz = std::sin(z_rad);
  const double cy = std::cos(y_rad), sy = std::sin(y_rad);
  const double cx = std::cos(x_rad), sx = std::sin(x_rad);
  Eigen::Matrix3d rz, ry, rx;
  rz << cz, -sz, 0, sz, cz, 0, 0, 0, 1;
  ry << cy, 0, sy, 0, 1, 0, -sy, 0, cy;
  rx << 1, 0, 0, 0, cx, -sx, 0, sx, cx;
  return rz * ry * rx;
}

Eigen::Vector3d rotmat_to_euler_zyx(const Eigen::Matrix3d& r) {
  const double y = std::asin(std::min(1.0, std::max(-1.0, -r(2, 0))));
  const double z = std::atan2(r(1, 0), r(0, 0));
  const double x = std::atan2(r(2, 1), r(2, 2));
  return {z, y, x};
}

std::string transform_to_text(const RigidTransform& t) {
  const Eigen::Matrix4d h = t.homogeneous();
  std::string out;
  char buf[32];
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      std::snprintf(buf, sizeof(buf), "%.16g", h(i, j));
      out += buf;
      out += (j == 3) ? '\n' : ' ';
    }
  }
  return out;
}

RigidTransform transform_from_text(const std::string& text) {
  std::istringstream in(text);
  Eigen::Matrix4d h;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (!(in >> h(i, j))) {
        throw std::runtime_error("transform text: expected 16 numbers");
      }
    }
  }
  RigidTransform t;
  t.rotation = h.topLeftCorner<3, 3>();
  t.translation = h.topRightCorner<3, 1>();
  return t;
}

}  // namespace pcr
