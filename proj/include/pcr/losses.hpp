#pragma once

#include <vector>

#include "pcr/point_cloud.hpp"

namespace pcr {

// Loss value plus its gradient with respect to the estimated cloud.
struct LossValue {
  double value = 0.0;
  std::vector<Eigen::Vector3d> dest_cloud_grad;
};

// Exact minimum-cost assignment over a dense n x n cost matrix (row-major);
// returns the matched column for each row. O(n^3).
std::vector<int> solve_assignment(const std::vector<double>& cost, int n);

// Earth Mover Distance: mean Euclidean distance under the optimal bijection
// between equal-size clouds. The assignment is treated as locally constant
// for differentiation; coincident matched pairs get zero gradient. Throws on
// empty clouds or a size mismatch.
LossValue emd(const PointCloud& est, const PointCloud& tmpl);

// Chamfer Distance: mean nearest-neighbor distance est->tmpl plus
// tmpl->est (sizes may differ). Gradients flow through the nearest pairs.
LossValue chamfer(const PointCloud& est, const PointCloud& tmpl);

}  // namespace pcr
