#pragma once

#include <Eigen/Core>
#include <vector>

namespace pcr {

// Ordered list of 3D points in normalized model units.
struct PointCloud {
  std::vector<Eigen::Vector3d> points;

  PointCloud() = default;
  explicit PointCloud(std::vector<Eigen::Vector3d> pts) : points(std::move(pts)) {}

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  Eigen::Vector3d& operator[](std::size_t i) { return points[i]; }
  const Eigen::Vector3d& operator[](std::size_t i) const { return points[i]; }
};

}  // namespace pcr
