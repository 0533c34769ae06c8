#include "pcr/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pcr {

KdTree3::KdTree3(const std::vector<Eigen::Vector3d>& points) : points_(points) {
  if (points_.empty()) throw std::invalid_argument("KdTree3: empty point set");
  nodes_.reserve(points_.size());
  std::vector<std::uint32_t> idx(points_.size());
  std::iota(idx.begin(), idx.end(), 0u);
  root_ = build(idx, 0, points_.size(), 0);
}

std::int32_t KdTree3::build(std::vector<std::uint32_t>& idx, std::size_t lo, std::size_t hi,
                            int depth) {
  if (lo >= hi) return -1;
  const int axis = depth % 3;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = points_[a][axis], cb = points_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const std::int32_t node_id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({idx[mid], axis, -1, -1});
  const std::int32_t left = build(idx, lo, mid, depth + 1);
  const std::int32_t right = build(idx, mid + 1, hi, depth + 1);
  nodes_[node_id].left = left;
  nodes_[node_id].right = right;
  return node_id;
}

void KdTree3::search(std::int32_t node, const Eigen::Vector3d& q, double& best_d2,
                     std::size_t& best_idx) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  const double d2 = (points_[n.point] - q).squaredNorm();
  if (d2 < best_d2 || (d2 == best_d2 && n.point < best_idx)) {
    best_d2 = d2;
    best_idx = n.point;
  }
  const double diff = q[n.axis] - points_[n.point][n.axis];
  const std::int32_t near = diff < 0 ? n.left : n.right;
  const std::int32_t far = diff < 0 ? n.right : n.left;
  search(near, q, best_d2, best_idx);
  // <= so an equally distant lower index on the far side is still found.
  if (diff * diff <= best_d2) search(far, q, best_d2, best_idx);
}

std::size_t KdTree3::nearest(const Eigen::Vector3d& q) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  std::size_t best_idx = points_.size();
  search(root_, q, best_d2, best_idx);
  return best_idx;
}

}  // namespace pcr
