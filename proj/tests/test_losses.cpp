#include <doctest.h>

#include "pcr/losses.hpp"
#include "testing_util.hpp"

using namespace pcr;

TEST_CASE("emd trivial matchings") {
  Rng rng(3);
  const PointCloud cloud = testutil::random_cloud(rng, 6);
  CHECK(emd(cloud, cloud).value == doctest::Approx(0.0).epsilon(1e-12));

  PointCloud permuted = cloud;
  rng.shuffle(permuted.points);
  CHECK(emd(permuted, cloud).value == doctest::Approx(0.0).epsilon(1e-12));

  // Crossing case: the optimal bijection recovers the pairing exactly.
  PointCloud est, tmpl;
  est.points = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  tmpl.points = {{2, 0, 0}, {0, 0, 0}, {1, 0, 0}};
  CHECK(emd(est, tmpl).value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("emd of a global shift on spread-out points") {
  // Points far apart relative to the shift, so the identity matching wins;
  // the exhaustive oracle confirms.
  Rng rng(7);
  PointCloud tmpl;
  for (int i = 0; i < 5; ++i) {
    tmpl.points.emplace_back(rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0, 10));
  }
  PointCloud est = tmpl;
  for (auto& p : est.points) p += Eigen::Vector3d(0.3, 0, 0);

  const double brute = testutil::brute_force_emd(est, tmpl);
  const double hungarian = emd(est, tmpl).value;
  CHECK(std::abs(hungarian - brute) < 1e-12);
  CHECK(hungarian == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("hungarian equals the exhaustive minimum on random pairs") {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng.index(6);  // 2..7
    const PointCloud est = testutil::random_cloud(rng, n);
    const PointCloud tmpl = testutil::random_cloud(rng, n);
    const double brute = testutil::brute_force_emd(est, tmpl);
    CHECK(std::abs(emd(est, tmpl).value - brute) < 1e-12);
  }
}

TEST_CASE("emd symmetry and sign") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const PointCloud a = testutil::random_cloud(rng, 9);
    const PointCloud b = testutil::random_cloud(rng, 9);
    const double ab = emd(a, b).value;
    const double ba = emd(b, a).value;
    CHECK(std::abs(ab - ba) < 1e-9);
    CHECK(ab >= 0.0);
  }
}

TEST_CASE("emd rejects bad inputs") {
  Rng rng(17);
  const PointCloud a = testutil::random_cloud(rng, 4);
  const PointCloud b = testutil::random_cloud(rng, 5);
  CHECK_THROWS_AS(emd(a, b), std::invalid_argument);
  CHECK_THROWS_AS(emd(PointCloud{}, PointCloud{}), std::invalid_argument);
}

TEST_CASE("emd gradient matches finite differences") {
  Rng rng(19);
  PointCloud est = testutil::random_cloud(rng, 4);
  const PointCloud tmpl = testutil::random_cloud(rng, 4);

  const LossValue lv = emd(est, tmpl);
  testutil::GradCheck check;
  const double h = 1e-6;
  for (std::size_t i = 0; i < est.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      check.add(lv.dest_cloud_grad[i][k],
                testutil::central_diff(est.points[i][k], h, [&] { return emd(est, tmpl).value; }));
    }
  }
  CHECK(check.rel_error() < 1e-6);
}

TEST_CASE("emd gradient is zero for coincident matched pairs") {
  Rng rng(23);
  const PointCloud cloud = testutil::random_cloud(rng, 5);
  const LossValue lv = emd(cloud, cloud);
  for (const auto& g : lv.dest_cloud_grad) CHECK(g.norm() == 0.0);
}

TEST_CASE("chamfer values") {
  Rng rng(29);
  const PointCloud cloud = testutil::random_cloud(rng, 8);
  CHECK(chamfer(cloud, cloud).value == doctest::Approx(0.0).epsilon(1e-12));

  PointCloud est, tmpl;
  est.points = {{0, 0, 0}};
  tmpl.points = {{1, 0, 0}};
  CHECK(chamfer(est, tmpl).value == doctest::Approx(2.0).epsilon(1e-12));

  // Sizes may differ.
  PointCloud three = testutil::random_cloud(rng, 3);
  PointCloud five = testutil::random_cloud(rng, 5);
  CHECK(chamfer(three, five).value >= 0.0);
  CHECK_THROWS_AS(chamfer(PointCloud{}, five), std::invalid_argument);
}

TEST_CASE("chamfer gradient matches finite differences") {
  Rng rng(31);
  PointCloud est = testutil::random_cloud(rng, 4);
  const PointCloud tmpl = testutil::random_cloud(rng, 4);

  const LossValue lv = chamfer(est, tmpl);
  testutil::GradCheck check;
  const double h = 1e-6;
  for (std::size_t i = 0; i < est.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      check.add(lv.dest_cloud_grad[i][k], testutil::central_diff(est.points[i][k], h, [&] {
                  return chamfer(est, tmpl).value;
                }));
    }
  }
  CHECK(check.rel_error() < 1e-6);
}

TEST_CASE("solve_assignment on a hand-checked matrix") {
  // Row 0 prefers col 1, row 1 prefers col 0; the off-diagonal matching
  // costs 2 total versus 10 on the diagonal.
  const std::vector<double> cost = {5.0, 1.0, 1.0, 5.0};
  const std::vector<int> match = solve_assignment(cost, 2);
  CHECK(match[0] == 1);
  CHECK(match[1] == 0);
  CHECK_THROWS_AS(solve_assignment({1.0}, 2), std::invalid_argument);
}
