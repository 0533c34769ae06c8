#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pcr/point_cloud.hpp"
#include "pcr/rng.hpp"

namespace pcr {

// Triangle mesh as stored in ModelNet-style OFF files. Polygons are
// fan-triangulated at parse time.
struct Mesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;
};

// Parses an OFF stream. Accepts the glued header variant ("OFF490 518 0")
// found in ModelNet files. Throws std::runtime_error naming the offending
// line on malformed input.
Mesh parse_off(std::istream& in);
Mesh parse_off_file(const std::string& path);

void write_off(const Mesh& mesh, std::ostream& out);

// m points, each drawn from a face chosen with probability proportional to
// area, then uniformly within the face. Throws if the total area is zero.
PointCloud area_weighted_sample(const Mesh& mesh, std::size_t m, Rng& rng);

// Greedy max-min subset of size n, seeded at index 0. Ties break to the
// lower index. Requires n <= cloud.size().
PointCloud farthest_point_sample(const PointCloud& cloud, std::size_t n);

// Uniformly scales so the bounding box fits a unit cube, then shifts the
// centroid to the origin. Zero-extent clouds are only recentered.
PointCloud normalize_unit_box(const PointCloud& cloud);

// Adds independent N(0, sigma^2) noise to every coordinate.
PointCloud add_gaussian_noise(const PointCloud& cloud, double sigma, Rng& rng);

// Default pipeline: area-sample 10x the target count, farthest-point sample
// down to n, normalize into the unit box.
PointCloud sample_mesh(const Mesh& mesh, std::size_t n, Rng& rng);

// ASCII XYZ: one "x y z" line per point.
void write_xyz(const PointCloud& cloud, std::ostream& out);
PointCloud read_xyz(std::istream& in);

// Packed binary: magic "PCRC", u32 count, count*3 little-endian f32.
void write_pcrc(const PointCloud& cloud, std::ostream& out);
PointCloud read_pcrc(std::istream& in);

void save_cloud(const PointCloud& cloud, const std::string& path, bool binary);
PointCloud load_cloud(const std::string& path);  // auto-detects the format

}  // namespace pcr
