#pragma once

// Shared helpers for the test suites: a synthetic ModelNet-style mesh,
// brute-force oracles, finite-difference gradient checking, temp dirs.

#include <Eigen/Dense>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "pcr/losses.hpp"
#include "pcr/meshio.hpp"
#include "pcr/nncore.hpp"
#include "pcr/rng.hpp"

namespace testutil {

// Axis-aligned box as 12 triangles appended to the mesh.
inline void add_box(pcr::Mesh& mesh, const Eigen::Vector3d& center,
                    const Eigen::Vector3d& half) {
  const std::uint32_t base = static_cast<std::uint32_t>(mesh.vertices.size());
  for (int i = 0; i < 8; ++i) {
    mesh.vertices.push_back(center + Eigen::Vector3d((i & 1) ? half[0] : -half[0],
                                                     (i & 2) ? half[1] : -half[1],
                                                     (i & 4) ? half[2] : -half[2]));
  }
  static const int quads[6][4] = {{0, 1, 3, 2}, {4, 6, 7, 5}, {0, 4, 5, 1},
                                  {2, 3, 7, 6}, {0, 2, 6, 4}, {1, 5, 7, 3}};
  for (const auto& q : quads) {
    mesh.faces.push_back({base + static_cast<std::uint32_t>(q[0]),
                          base + static_cast<std::uint32_t>(q[1]),
                          base + static_cast<std::uint32_t>(q[2])});
    mesh.faces.push_back({base + static_cast<std::uint32_t>(q[0]),
                          base + static_cast<std::uint32_t>(q[2]),
                          base + static_cast<std::uint32_t>(q[3])});
  }
}

// CAD-style chair with a single armrest; no rotational symmetry, so poses
// are unambiguous.
inline pcr::Mesh make_chair_mesh() {
  pcr::Mesh mesh;
  add_box(mesh, {0.0, 0.0, 0.45}, {0.40, 0.35, 0.05});    // seat
  add_box(mesh, {0.0, -0.32, 0.95}, {0.40, 0.03, 0.45});  // backrest
  for (const double sx : {-0.35, 0.35}) {
    for (const double sy : {-0.30, 0.30}) {
      add_box(mesh, {sx, sy, 0.20}, {0.04, 0.04, 0.20});  // legs
    }
  }
  add_box(mesh, {0.44, 0.0, 0.62}, {0.04, 0.28, 0.04});  // one armrest
  return mesh;
}

inline std::string write_chair_off(const std::filesystem::path& path) {
  std::ofstream out(path);
  pcr::write_off(make_chair_mesh(), out);
  return path.string();
}

inline pcr::PointCloud random_cloud(pcr::Rng& rng, std::size_t n, double extent = 1.0) {
  pcr::PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    cloud.points.emplace_back(rng.uniform(-extent, extent), rng.uniform(-extent, extent),
                              rng.uniform(-extent, extent));
  }
  return cloud;
}

// Exhaustive minimum over all bijections; usable for n <= 8.
inline double brute_force_emd(const pcr::PointCloud& est, const pcr::PointCloud& tmpl) {
  const std::size_t n = est.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += (est.points[i] - tmpl.points[perm[i]]).norm();
    }
    best = std::min(best, total / static_cast<double>(n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Collects (analytic, finite-difference) pairs and reports the relative
// error of the gradient vector, ||a - fd|| / max(||a||, ||fd||). Robust to
// round-off noise on individual near-zero entries while still catching
// missing terms, transposes and sign flips.
class GradCheck {
 public:
  void add(double analytic, double fd) { pairs_.emplace_back(analytic, fd); }

  double rel_error() const {
    double num = 0.0, na = 0.0, nf = 0.0;
    for (const auto& [a, b] : pairs_) {
      num += (a - b) * (a - b);
      na += a * a;
      nf += b * b;
    }
    return std::sqrt(num) / std::max({std::sqrt(na), std::sqrt(nf), 1e-12});
  }

  std::size_t size() const { return pairs_.size(); }

 private:
  std::vector<std::pair<double, double>> pairs_;
};

// Spec tolerance for gradient checks in this build's precision.
inline double grad_tolerance() { return sizeof(pcr::nn::scalar) == 4 ? 1e-3 : 1e-6; }

// Central difference d f / d slot.
template <typename Scalar, typename F>
double central_diff(Scalar& slot, double h, F&& f) {
  const Scalar orig = slot;
  slot = static_cast<Scalar>(orig + h);
  const double fp = f();
  slot = static_cast<Scalar>(orig - h);
  const double fm = f();
  slot = orig;
  return (fp - fm) / (2.0 * h);
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("pcr_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
