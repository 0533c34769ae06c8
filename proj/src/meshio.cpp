#include "pcr/meshio.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pcr {

namespace {

[[noreturn]] void parse_fail(int line, const std::string& what) {
  throw std::runtime_error("OFF parse error at line " + std::to_string(line) + ": " + what);
}

// Line-oriented reader that skips blanks and '#' comments and tracks the
// 1-based line number for error messages.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& out) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      std::size_t start = line.find_first_not_of(" \t\r\n");
      if (start == std::string::npos) continue;
      if (line[start] == '#') continue;
      out = line.substr(start);
      return true;
    }
    return false;
  }

  int line() const { return line_; }

 private:
  std::istream& in_;
  int line_ = 0;
};

bool parse_counts(const std::string& s, long long& nv, long long& nf) {
  std::istringstream ss(s);
  long long ne = 0;
  if (!(ss >> nv >> nf)) return false;
  ss >> ne;  // edge count, ignored
  return true;
}

void write_le_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_le_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("point cloud file truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_le_f32(std::ostream& out, float v) {
  write_le_u32(out, std::bit_cast<std::uint32_t>(v));
}

float read_le_f32(std::istream& in) {
  return std::bit_cast<float>(read_le_u32(in));
}

}  // namespace

Mesh parse_off(std::istream& in) {
  LineReader reader(in);
  std::string line;
  if (!reader.next(line)) parse_fail(reader.line(), "empty file");
  if (line.compare(0, 3, "OFF") != 0) parse_fail(reader.line(), "missing OFF header");

  long long nv = 0, nf = 0;
  std::string rest = line.substr(3);
  if (rest.find_first_not_of(" \t\r") != std::string::npos) {
    // Glued variant: counts share the header line.
    if (!parse_counts(rest, nv, nf)) parse_fail(reader.line(), "bad counts after OFF");
  } else {
    if (!reader.next(line)) parse_fail(reader.line(), "missing vertex/face counts");
    if (!parse_counts(line, nv, nf)) parse_fail(reader.line(), "bad vertex/face counts");
  }
  if (nv < 0 || nf < 0) parse_fail(reader.line(), "negative counts");

  Mesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (long long i = 0; i < nv; ++i) {
    if (!reader.next(line)) parse_fail(reader.line(), "truncated vertex list");
    std::istringstream ss(line);
    Eigen::Vector3d v;
    if (!(ss >> v[0] >> v[1] >> v[2])) parse_fail(reader.line(), "bad vertex");
    if (!v.allFinite()) parse_fail(reader.line(), "non-finite vertex");
    mesh.vertices.push_back(v);
  }

  for (long long i = 0; i < nf; ++i) {
    if (!reader.next(line)) parse_fail(reader.line(), "truncated face list");
    std::istringstream ss(line);
    long long k = 0;
    if (!(ss >> k) || k < 3) parse_fail(reader.line(), "bad face vertex count");
    std::vector<std::uint32_t> idx(static_cast<std::size_t>(k));
    for (long long j = 0; j < k; ++j) {
      long long v = 0;
      if (!(ss >> v)) parse_fail(reader.line(), "truncated face");
      if (v < 0 || v >= nv) parse_fail(reader.line(), "face index out of range");
      idx[static_cast<std::size_t>(j)] = static_cast<std::uint32_t>(v);
    }
    for (std::size_t j = 1; j + 1 < idx.size(); ++j) {
      mesh.faces.push_back({idx[0], idx[j], idx[j + 1]});
    }
  }
  return mesh;
}

Mesh parse_off_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_off(in);
}

void write_off(const Mesh& mesh, std::ostream& out) {
  out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.faces.size() << " 0\n";
  char buf[96];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", v[0], v[1], v[2]);
    out << buf;
  }
  for (const auto& f : mesh.faces) {
    out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  }
}

PointCloud area_weighted_sample(const Mesh& mesh, std::size_t m, Rng& rng) {
  if (mesh.faces.empty()) throw std::runtime_error("mesh has no faces");
  std::vector<double> cumulative(mesh.faces.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const auto& f = mesh.faces[i];
    const Eigen::Vector3d& a = mesh.vertices[f[0]];
    const Eigen::Vector3d& b = mesh.vertices[f[1]];
    const Eigen::Vector3d& c = mesh.vertices[f[2]];
    total += 0.5 * (b - a).cross(c - a).norm();
    cumulative[i] = total;
  }
  if (total <= 0.0) throw std::runtime_error("mesh has zero surface area");

  PointCloud cloud;
  cloud.points.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double u = rng.uniform() * total;
    const std::size_t fi = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    const auto& f = mesh.faces[std::min(fi, mesh.faces.size() - 1)];
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const Eigen::Vector3d p = (1.0 - r1) * mesh.vertices[f[0]] +
                              r1 * (1.0 - r2) * mesh.vertices[f[1]] +
                              r1 * r2 * mesh.vertices[f[2]];
    cloud.points.push_back(p);
  }
  return cloud;
}

PointCloud farthest_point_sample(const PointCloud& cloud, std::size_t n) {
  if (n > cloud.size()) {
    throw std::runtime_error("farthest_point_sample: requested more points than available");
  }
  PointCloud out;
  if (n == 0) return out;
  out.points.reserve(n);
  out.points.push_back(cloud.points[0]);

  std::vector<double> dist(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    dist[i] = (cloud.points[i] - cloud.points[0]).squaredNorm();
  }
  while (out.points.size() < n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < cloud.size(); ++i) {
      if (dist[i] > dist[best]) best = i;
    }
    out.points.push_back(cloud.points[best]);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      dist[i] = std::min(dist[i], (cloud.points[i] - cloud.points[best]).squaredNorm());
    }
  }
  return out;
}

PointCloud normalize_unit_box(const PointCloud& cloud) {
  if (cloud.empty()) throw std::runtime_error("normalize_unit_box: empty cloud");
  Eigen::Vector3d lo = cloud.points[0], hi = cloud.points[0];
  for (const auto& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double extent = (hi - lo).maxCoeff();
  const double scale = extent > 1e-30 ? 1.0 / extent : 1.0;

  PointCloud out;
  out.points.reserve(cloud.size());
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : cloud.points) {
    out.points.push_back(p * scale);
    centroid += out.points.back();
  }
  centroid /= static_cast<double>(cloud.size());
  for (auto& p : out.points) p -= centroid;
  return out;
}

PointCloud add_gaussian_noise(const PointCloud& cloud, double sigma, Rng& rng) {
  PointCloud out = cloud;
  if (sigma == 0.0) return out;
  for (auto& p : out.points) {
    for (int k = 0; k < 3; ++k) p[k] += sigma * rng.gaussian();
  }
  return out;
}

PointCloud sample_mesh(const Mesh& mesh, std::size_t n, Rng& rng) {
  PointCloud dense = area_weighted_sample(mesh, 10 * n, rng);
  return normalize_unit_box(farthest_point_sample(dense, n));
}

void write_xyz(const PointCloud& cloud, std::ostream& out) {
  char buf[96];
  for (const auto& p : cloud.points) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", p[0], p[1], p[2]);
    out << buf;
  }
}

PointCloud read_xyz(std::istream& in) {
  PointCloud cloud;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::istringstream ss(line);
    Eigen::Vector3d p;
    if (!(ss >> p[0] >> p[1] >> p[2]) || !p.allFinite()) {
      throw std::runtime_error("XYZ parse error at line " + std::to_string(line_no));
    }
    cloud.points.push_back(p);
  }
  if (cloud.empty()) throw std::runtime_error("XYZ file holds no points");
  return cloud;
}

void write_pcrc(const PointCloud& cloud, std::ostream& out) {
  out.write("PCRC", 4);
  write_le_u32(out, static_cast<std::uint32_t>(cloud.size()));
  for (const auto& p : cloud.points) {
    for (int k = 0; k < 3; ++k) write_le_f32(out, static_cast<float>(p[k]));
  }
}

PointCloud read_pcrc(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "PCRC", 4) != 0) {
    throw std::runtime_error("bad PCRC magic");
  }
  const std::uint32_t count = read_le_u32(in);
  if (count == 0) throw std::runtime_error("PCRC file holds no points");
  PointCloud cloud;
  cloud.points.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Eigen::Vector3d p;
    for (int k = 0; k < 3; ++k) p[k] = read_le_f32(in);
    if (!p.allFinite()) throw std::runtime_error("PCRC file holds non-finite point");
    cloud.points.push_back(p);
  }
  return cloud;
}

void save_cloud(const PointCloud& cloud, const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  if (binary) {
    write_pcrc(cloud, out);
  } else {
    write_xyz(cloud, out);
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

PointCloud load_cloud(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4] = {};
  in.read(magic, 4);
  in.clear();
  in.seekg(0);
  if (std::memcmp(magic, "PCRC", 4) == 0) return read_pcrc(in);
  return read_xyz(in);
}

}  // namespace pcr
