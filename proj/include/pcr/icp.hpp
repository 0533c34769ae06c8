#pragma once

#include <utility>
#include <vector>

#include "pcr/registration.hpp"

namespace pcr {

// Least-squares rigid transform mapping src onto dst over the given
// (src index, dst index) pairs, via cross-covariance SVD with reflection
// correction. Throws on fewer than 3 pairs or a rank-deficient (collinear)
// correspondence set.
RigidTransform kabsch_best_fit(const PointCloud& src, const PointCloud& dst,
                               const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

// Classical point-to-point ICP: kd-tree nearest-neighbor correspondences,
// Kabsch step, convergence on ||T_i * T_{i-1}^-1 - I||_F < eps. The result's
// correspondence_mse holds the post-fit mean squared correspondence
// distance per iteration.
RegistrationResult icp_register(const PointCloud& source, const PointCloud& tmpl,
                                int max_iter = 100, double eps = 1e-7);

}  // namespace pcr
