#pragma once

#include <Eigen/Core>
#include <string>

#include "pcr/point_cloud.hpp"
#include "pcr/rng.hpp"

namespace pcr {

// Scalar-first unit quaternion.
struct Quaternion {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;
};

// Raw 7-vector pose as emitted by the network head: translation followed by
// an unnormalized quaternion (w, x, y, z).
struct Pose7 {
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  Eigen::Vector4d q_raw = Eigen::Vector4d::Zero();
};

struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  Eigen::Matrix4d homogeneous() const;
  RigidTransform inverse() const;
};

// Unit quaternion from a raw 4-vector. A (near-)zero input falls back to the
// identity quaternion so a zeroed network head yields the identity pose.
Quaternion quat_normalize(const Eigen::Vector4d& q_raw);

Eigen::Matrix3d quat_to_rotmat(const Quaternion& q);

RigidTransform pose7_to_transform(const Pose7& p);

// Result applies b first, then a: R = Ra*Rb, t = Ra*tb + ta.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

Eigen::Vector3d apply_transform(const RigidTransform& t, const Eigen::Vector3d& x);
PointCloud apply_transform(const RigidTransform& t, const PointCloud& cloud);

// Euler angles (ZYX intrinsic) uniform in +-angle_range_deg, translation
// components uniform in +-trans_range. Draw order: z, y, x angles, then
// tx, ty, tz.
RigidTransform random_transform(Rng& rng, double angle_range_deg, double trans_range);

// Axis-angle magnitude of est * gt^-1, in degrees, range [0, 180].
double rotation_error_deg(const RigidTransform& est, const RigidTransform& gt);

double translation_error(const RigidTransform& est, const RigidTransform& gt);

// Frobenius norm of curr * prev^-1 - I over homogeneous 4x4 matrices.
double convergence_delta(const RigidTransform& curr, const RigidTransform& prev);

// Rotation about z by z_rad, then y, then x (intrinsic): R = Rz*Ry*Rx.
Eigen::Matrix3d euler_zyx_to_rotmat(double z_rad, double y_rad, double x_rad);

// Recovers (z, y, x) angles; valid away from the y = +-90deg singularity.
Eigen::Vector3d rotmat_to_euler_zyx(const Eigen::Matrix3d& r);

// Row-major homogeneous 4x4 as 16 whitespace-separated decimal floats.
std::string transform_to_text(const RigidTransform& t);
RigidTransform transform_from_text(const std::string& text);  // throws std::runtime_error

}  // namespace pcr
