#include <doctest.h>

#include <set>
#include <sstream>

#include "pcr/meshio.hpp"
#include "testing_util.hpp"

using namespace pcr;

TEST_CASE("parse_off handles the plain header") {
  std::istringstream in("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  const Mesh mesh = parse_off(in);
  CHECK(mesh.vertices.size() == 3);
  CHECK(mesh.faces.size() == 1);
}

TEST_CASE("parse_off handles the glued ModelNet header") {
  std::istringstream in("OFF3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  const Mesh mesh = parse_off(in);
  CHECK(mesh.vertices.size() == 3);
  CHECK(mesh.faces.size() == 1);
}

TEST_CASE("parse_off fan-triangulates polygons") {
  std::istringstream in("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n");
  const Mesh mesh = parse_off(in);
  REQUIRE(mesh.faces.size() == 2);
  CHECK(mesh.faces[0] == std::array<std::uint32_t, 3>{0, 1, 2});
  CHECK(mesh.faces[1] == std::array<std::uint32_t, 3>{0, 2, 3});
}

TEST_CASE("parse_off rejects malformed input with a line number") {
  std::istringstream bad_index("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 99\n");
  CHECK_THROWS_WITH_AS(parse_off(bad_index),
                       doctest::Contains("line 6"), std::runtime_error);

  std::istringstream truncated("OFF\n5 1 0\n0 0 0\n1 0 0\n");
  CHECK_THROWS_WITH_AS(parse_off(truncated), doctest::Contains("line"), std::runtime_error);

  std::istringstream no_header("3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  CHECK_THROWS_AS(parse_off(no_header), std::runtime_error);

  std::istringstream empty("");
  CHECK_THROWS_AS(parse_off(empty), std::runtime_error);
}

TEST_CASE("off write/parse round trip keeps counts") {
  const Mesh chair = testutil::make_chair_mesh();
  std::ostringstream out;
  write_off(chair, out);
  std::istringstream in(out.str());
  const Mesh back = parse_off(in);
  CHECK(back.vertices.size() == chair.vertices.size());
  CHECK(back.faces.size() == chair.faces.size());
}

TEST_CASE("area_weighted_sample stays on the surface") {
  Mesh tri;
  tri.vertices = {{0, 0, 0}, {2, 0, 0}, {0, 2, 0}};
  tri.faces = {{0, 1, 2}};
  Rng rng(13);
  const PointCloud cloud = area_weighted_sample(tri, 1000, rng);
  REQUIRE(cloud.size() == 1000);
  for (const auto& p : cloud.points) {
    CHECK(std::abs(p[2]) < 1e-9);  // triangle plane
    CHECK(p[0] >= -1e-9);
    CHECK(p[1] >= -1e-9);
    CHECK(p[0] + p[1] <= 2.0 + 1e-9);  // inside the triangle
  }
}

TEST_CASE("area_weighted_sample weights faces by area") {
  // Two disjoint triangles, area ratio 9:1, separated along z.
  Mesh mesh;
  mesh.vertices = {{0, 0, 0}, {6, 0, 0}, {0, 3, 0},      // area 9
                   {0, 0, 5}, {2, 0, 5}, {0, 1, 5}};     // area 1
  mesh.faces = {{0, 1, 2}, {3, 4, 5}};
  Rng rng(29);
  const std::size_t n = 100000;
  const PointCloud cloud = area_weighted_sample(mesh, n, rng);
  std::size_t big = 0;
  for (const auto& p : cloud.points) {
    if (p[2] < 2.5) ++big;
  }
  // Binomial with p = 0.9: mean 90000, sigma ~ 94.9; allow 3 sigma.
  CHECK(std::abs(static_cast<double>(big) - 90000.0) < 3 * 94.9);
}

TEST_CASE("area_weighted_sample determinism and errors") {
  const Mesh chair = testutil::make_chair_mesh();
  Rng a(5), b(5);
  const PointCloud ca = area_weighted_sample(chair, 200, a);
  const PointCloud cb = area_weighted_sample(chair, 200, b);
  for (std::size_t i = 0; i < ca.size(); ++i) {
    CHECK((ca.points[i] - cb.points[i]).norm() == 0.0);
  }

  Mesh degenerate;
  degenerate.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  degenerate.faces = {{0, 1, 2}};
  Rng rng(1);
  CHECK_THROWS_AS(area_weighted_sample(degenerate, 10, rng), std::runtime_error);

  Mesh no_faces;
  no_faces.vertices = {{0, 0, 0}};
  CHECK_THROWS_AS(area_weighted_sample(no_faces, 10, rng), std::runtime_error);
}

TEST_CASE("farthest_point_sample greedy max-min") {
  PointCloud pair;
  pair.points = {{0, 0, 0}, {1, 1, 1}};
  const PointCloud both = farthest_point_sample(pair, 2);
  CHECK(both.size() == 2);

  PointCloud line;
  line.points = {{0, 0, 0}, {0.1, 0, 0}, {1, 0, 0}};
  const PointCloud two = farthest_point_sample(line, 2);
  REQUIRE(two.size() == 2);
  CHECK(two.points[0] == Eigen::Vector3d(0, 0, 0));
  CHECK(two.points[1] == Eigen::Vector3d(1, 0, 0));

  Rng rng(7);
  const PointCloud cloud = testutil::random_cloud(rng, 50);
  const PointCloud all = farthest_point_sample(cloud, 50);
  std::set<std::array<double, 3>> input, output;
  for (const auto& p : cloud.points) input.insert({p[0], p[1], p[2]});
  for (const auto& p : all.points) output.insert({p[0], p[1], p[2]});
  CHECK(input == output);  // permutation of the input set

  const PointCloud subset = farthest_point_sample(cloud, 20);
  for (const auto& p : subset.points) {
    CHECK(input.count({p[0], p[1], p[2]}) == 1);  // exact coordinates
  }

  CHECK_THROWS_AS(farthest_point_sample(cloud, 51), std::runtime_error);
}

TEST_CASE("normalize_unit_box") {
  PointCloud two;
  two.points = {{0, 0, 0}, {2, 0, 0}};
  const PointCloud norm = normalize_unit_box(two);
  CHECK((norm.points[0] - Eigen::Vector3d(-0.5, 0, 0)).norm() < 1e-12);
  CHECK((norm.points[1] - Eigen::Vector3d(0.5, 0, 0)).norm() < 1e-12);

  PointCloud single;
  single.points = {{3, -4, 5}};
  const PointCloud centered = normalize_unit_box(single);
  CHECK(centered.points[0].norm() == 0.0);

  Rng rng(23);
  const PointCloud cloud = testutil::random_cloud(rng, 100, 7.0);
  const PointCloud unit = normalize_unit_box(cloud);
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero(), lo = unit.points[0], hi = unit.points[0];
  for (const auto& p : unit.points) {
    centroid += p;
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  centroid /= static_cast<double>(unit.size());
  CHECK(centroid.norm() < 1e-9);
  CHECK((hi - lo).maxCoeff() <= 1.0 + 1e-12);

  const PointCloud twice = normalize_unit_box(unit);
  for (std::size_t i = 0; i < unit.size(); ++i) {
    CHECK((twice.points[i] - unit.points[i]).norm() < 1e-9);  // idempotent
  }
}

TEST_CASE("add_gaussian_noise") {
  Rng rng(37);
  const PointCloud cloud = testutil::random_cloud(rng, 30);
  const PointCloud same = add_gaussian_noise(cloud, 0.0, rng);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK((same.points[i] - cloud.points[i]).norm() == 0.0);
  }

  PointCloud big;
  big.points.assign(333334, Eigen::Vector3d::Zero());
  Rng noise_rng(101);
  const PointCloud noisy = add_gaussian_noise(big, 0.04, noise_rng);
  double sum = 0.0, sum2 = 0.0;
  std::size_t count = 0;
  for (const auto& p : noisy.points) {
    for (int k = 0; k < 3; ++k) {
      sum += p[k];
      sum2 += p[k] * p[k];
      ++count;
    }
  }
  const double mean = sum / count;
  const double std = std::sqrt(sum2 / count - mean * mean);
  CHECK(std >= 0.039);
  CHECK(std <= 0.041);

  Rng r1(5), r2(5);
  const PointCloud n1 = add_gaussian_noise(cloud, 0.01, r1);
  const PointCloud n2 = add_gaussian_noise(cloud, 0.01, r2);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK((n1.points[i] - n2.points[i]).norm() == 0.0);
  }
}

TEST_CASE("cloud file formats round trip") {
  Rng rng(43);
  const PointCloud cloud = testutil::random_cloud(rng, 64);
  testutil::TempDir dir("meshio");

  save_cloud(cloud, dir.file("a.xyz"), false);
  const PointCloud ascii = load_cloud(dir.file("a.xyz"));
  REQUIRE(ascii.size() == cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK((ascii.points[i] - cloud.points[i]).norm() == 0.0);  // %.17g is exact
  }

  save_cloud(cloud, dir.file("a.pcrc"), true);
  const PointCloud binary = load_cloud(dir.file("a.pcrc"));
  REQUIRE(binary.size() == cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      CHECK(binary.points[i][k] == static_cast<double>(static_cast<float>(cloud.points[i][k])));
    }
  }

  CHECK_THROWS_AS(load_cloud(dir.file("missing.xyz")), std::runtime_error);

  std::ofstream garbage(dir.file("bad.pcrc"), std::ios::binary);
  garbage << "PCRX????";
  garbage.close();
  CHECK_THROWS_AS(load_cloud(dir.file("bad.pcrc")), std::runtime_error);
}

TEST_CASE("sample_mesh pipeline output is normalized") {
  const Mesh chair = testutil::make_chair_mesh();
  Rng rng(77);
  const PointCloud cloud = sample_mesh(chair, 256, rng);
  REQUIRE(cloud.size() == 256);
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : cloud.points) centroid += p;
  CHECK((centroid / 256.0).norm() < 1e-9);
}
