#include "pcr/losses.hpp"

#include <limits>
#include <stdexcept>

#include "pcr/kdtree.hpp"

namespace pcr {

std::vector<int> solve_assignment(const std::vector<double>& cost, int n) {
  if (n <= 0 || cost.size() != static_cast<std::size_t>(n) * n) {
    throw std::invalid_argument("solve_assignment: bad cost matrix");
  }
  const double inf = std::numeric_limits<double>::infinity();
  // Shortest-augmenting-path assignment with potentials, 1-indexed with a
  // virtual column 0.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * static_cast<std::size_t>(n) + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

LossValue emd(const PointCloud& est, const PointCloud& tmpl) {
  if (est.empty() || tmpl.empty()) throw std::invalid_argument("emd: empty cloud");
  if (est.size() != tmpl.size()) {
    throw std::invalid_argument("emd: clouds must have equal sizes");
  }
  const int n = static_cast<int>(est.size());
  std::vector<double> cost(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      cost[static_cast<std::size_t>(i) * n + j] = (est.points[i] - tmpl.points[j]).norm();
    }
  }
  const std::vector<int> match = solve_assignment(cost, n);

  LossValue loss;
  loss.dest_cloud_grad.assign(est.size(), Eigen::Vector3d::Zero());
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d diff = est.points[i] - tmpl.points[match[i]];
    const double d = diff.norm();
    loss.value += d * inv_n;
    if (d > 1e-12) {
      loss.dest_cloud_grad[i] = diff * (inv_n / d);
    }
  }
  return loss;
}

LossValue chamfer(const PointCloud& est, const PointCloud& tmpl) {
  if (est.empty() || tmpl.empty()) throw std::invalid_argument("chamfer: empty cloud");
  LossValue loss;
  loss.dest_cloud_grad.assign(est.size(), Eigen::Vector3d::Zero());

  const KdTree3 tmpl_tree(tmpl.points);
  const double inv_est = 1.0 / static_cast<double>(est.size());
  for (std::size_t i = 0; i < est.size(); ++i) {
    const Eigen::Vector3d diff = est.points[i] - tmpl.points[tmpl_tree.nearest(est.points[i])];
    const double d = diff.norm();
    loss.value += d * inv_est;
    if (d > 1e-12) loss.dest_cloud_grad[i] += diff * (inv_est / d);
  }

  const KdTree3 est_tree(est.points);
  const double inv_tmpl = 1.0 / static_cast<double>(tmpl.size());
  for (std::size_t j = 0; j < tmpl.size(); ++j) {
    const std::size_t i = est_tree.nearest(tmpl.points[j]);
    const Eigen::Vector3d diff = est.points[i] - tmpl.points[j];
    const double d = diff.norm();
    loss.value += d * inv_tmpl;
    if (d > 1e-12) loss.dest_cloud_grad[i] += diff * (inv_tmpl / d);
  }
  return loss;
}

}  // namespace pcr
