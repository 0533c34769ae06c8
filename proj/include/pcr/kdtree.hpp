#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace pcr {

// Static 3D kd-tree for exact nearest-neighbor queries. Ties on distance
// resolve to the lower point index, matching a linear scan with the same
// rule.
class KdTree3 {
 public:
  explicit KdTree3(const std::vector<Eigen::Vector3d>& points);

  std::size_t size() const { return points_.size(); }

  // Index of the nearest stored point to q.
  std::size_t nearest(const Eigen::Vector3d& q) const;

 private:
  struct Node {
    std::uint32_t point = 0;
    int axis = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build(std::vector<std::uint32_t>& idx, std::size_t lo, std::size_t hi,
                     int depth);
  void search(std::int32_t node, const Eigen::Vector3d& q, double& best_d2,
              std::size_t& best_idx) const;

  std::vector<Eigen::Vector3d> points_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

}  // namespace pcr
