#include "pcr/icp.hpp"

#include <Eigen/Dense>
#include <chrono>
#include <stdexcept>

#include "pcr/kdtree.hpp"

namespace pcr {

RigidTransform kabsch_best_fit(const PointCloud& src, const PointCloud& dst,
                               const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  if (pairs.size() < 3) {
    throw std::invalid_argument("kabsch_best_fit: need at least 3 correspondences");
  }
  Eigen::Vector3d c_src = Eigen::Vector3d::Zero(), c_dst = Eigen::Vector3d::Zero();
  for (const auto& [i, j] : pairs) {
    c_src += src.points[i];
    c_dst += dst.points[j];
  }
  const double inv_n = 1.0 / static_cast<double>(pairs.size());
  c_src *= inv_n;
  c_dst *= inv_n;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& [i, j] : pairs) {
    cov += (src.points[i] - c_src) * (dst.points[j] - c_dst).transpose();
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  // Collinear correspondences leave the rotation about the line free.
  if (sv[1] <= sv[0] * 1e-12 || sv[0] == 0.0) {
    throw std::invalid_argument("kabsch_best_fit: degenerate correspondence set");
  }
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;

  RigidTransform t;
  t.rotation = svd.matrixV() * d * svd.matrixU().transpose();
  t.translation = c_dst - t.rotation * c_src;
  return t;
}

RegistrationResult icp_register(const PointCloud& source, const PointCloud& tmpl,
                                int max_iter, double eps) {
  if (source.empty() || tmpl.empty()) throw std::invalid_argument("icp_register: empty cloud");
  if (max_iter < 1) throw std::invalid_argument("icp_register: max_iter must be >= 1");

  const auto t_start = std::chrono::steady_clock::now();
  const KdTree3 tree(tmpl.points);

  RegistrationResult result;
  PointCloud current = source;
  RigidTransform cumulative;
  std::vector<std::pair<std::size_t, std::size_t>> pairs(source.size());

  for (int iter = 0; iter < max_iter; ++iter) {
    for (std::size_t i = 0; i < current.size(); ++i) {
      pairs[i] = {i, tree.nearest(current.points[i])};
    }
    const RigidTransform step = kabsch_best_fit(current, tmpl, pairs);
    current = apply_transform(step, current);

    double mse = 0.0;
    for (const auto& [i, j] : pairs) {
      mse += (current.points[i] - tmpl.points[j]).squaredNorm();
    }
    result.correspondence_mse.push_back(mse / static_cast<double>(pairs.size()));

    const RigidTransform prev = cumulative;
    cumulative = compose(step, cumulative);
    result.per_iteration.push_back(step);
    if (convergence_delta(cumulative, prev) < eps) {
      result.converged = true;
      break;
    }
  }

  result.transform = cumulative;
  result.iterations_used = static_cast<int>(result.per_iteration.size());
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

}  // namespace pcr
