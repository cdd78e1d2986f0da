#include <doctest.h>

#include <algorithm>
#include <random>

#include "l2n2/neighbors.hpp"
#include "l2n2/random.hpp"

using namespace l2n2;

namespace {

// All-pairs oracle: sort every other point by (distance, index).
NeighborTable all_pairs_oracle(const PointCloud& cloud, int kmax) {
  NeighborTable t;
  t.kmax = kmax;
  t.radii.resize(cloud.rows(), kmax);
  t.neighbors.resize(cloud.rows(), kmax);
  for (Index i = 0; i < cloud.rows(); ++i) {
    std::vector<std::pair<double, Index>> all;
    for (Index p = 0; p < cloud.rows(); ++p)
      if (p != i) all.push_back({(cloud.row(i) - cloud.row(p)).squaredNorm(), p});
    std::sort(all.begin(), all.end());
    for (int m = 0; m < kmax; ++m) {
      t.radii(i, m) = std::sqrt(all[static_cast<std::size_t>(m)].first);
      t.neighbors(i, m) = all[static_cast<std::size_t>(m)].second;
    }
    t.query.push_back(i);
  }
  return t;
}

PointCloud uniform_cloud(Index n, Index d, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointCloud c(n, d);
  for (Index i = 0; i < c.size(); ++i) c.data()[i] = u(rng);
  return c;
}

}  // namespace

TEST_CASE("three collinear points") {
  PointCloud cloud(3, 1);
  cloud << 0, 1, 3;
  for (auto algo : {KnnAlgorithm::KdTree, KnnAlgorithm::Brute}) {
    const auto t = build_neighbor_table(cloud, 2, algo);
    CHECK(t.radii(0, 0) == 1);
    CHECK(t.radii(0, 1) == 3);
    CHECK(t.radii(1, 0) == 1);
    CHECK(t.radii(1, 1) == 2);
    CHECK(t.radii(2, 0) == 2);
    CHECK(t.radii(2, 1) == 3);
  }
}

TEST_CASE("duplicates are neighbors at distance zero") {
  PointCloud cloud(3, 1);
  cloud << 0, 0, 1;
  for (auto algo : {KnnAlgorithm::KdTree, KnnAlgorithm::Brute}) {
    const auto t = build_neighbor_table(cloud, 1, algo);
    CHECK(t.radii(0, 0) == 0);
    CHECK(t.neighbors(0, 0) == 1);
    CHECK(t.radii(1, 0) == 0);
    CHECK(t.neighbors(1, 0) == 0);
    CHECK(t.radii(2, 0) == 1);
    CHECK(t.duplicate_count() == 2);
  }
}

TEST_CASE("invalid arguments") {
  PointCloud cloud(3, 2);
  cloud.setRandom();
  CHECK_THROWS_AS(build_neighbor_table(cloud, 3), Error);
  CHECK_THROWS_AS(build_neighbor_table(cloud, 0), Error);
  cloud(1, 1) = std::numeric_limits<double>::quiet_NaN();
  try {
    build_neighbor_table(cloud, 1);
    FAIL("expected invalid-data");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidData);
  }
  PointCloud ok(3, 2);
  ok.setZero();
  ok(2, 0) = 1;
  const std::vector<Index> bad{5};
  CHECK_THROWS_AS(build_neighbor_table(ok, 1, std::span<const Index>(bad)), Error);
}

TEST_CASE("100 uniform points in the unit square match the all-pairs oracle") {
  const PointCloud cloud = uniform_cloud(100, 2, 7);
  const auto oracle = all_pairs_oracle(cloud, 8);
  for (auto algo : {KnnAlgorithm::KdTree, KnnAlgorithm::Brute}) {
    const auto t = build_neighbor_table(cloud, 8, algo);
    CHECK(t.radii.isApprox(oracle.radii, 1e-14));
    CHECK(t.neighbors == oracle.neighbors);
  }
}

TEST_CASE("property: both search paths equal the oracle for n <= 200") {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = std::uniform_int_distribution<Index>(10, 200)(rng);
    const Index d = std::uniform_int_distribution<Index>(1, 24)(rng);
    const int kmax = static_cast<int>(std::uniform_int_distribution<Index>(1, std::min<Index>(n - 1, 12))(rng));
    PointCloud cloud = uniform_cloud(n, d, rng());
    if (trial % 4 == 0) cloud = (cloud.array() * 1e6 + 3e7).matrix();  // large offset
    if (trial % 5 == 0) cloud = cloud.array().round().matrix();        // many exact ties
    const auto oracle = all_pairs_oracle(cloud, kmax);
    const auto kd = build_neighbor_table(cloud, kmax, KnnAlgorithm::KdTree);
    const auto brute = build_neighbor_table(cloud, kmax, KnnAlgorithm::Brute);
    CAPTURE(trial);
    CHECK(kd.radii.isApprox(oracle.radii, 1e-12));
    CHECK(brute.radii.isApprox(oracle.radii, 1e-12));
    // The two search paths share one distance routine, so they agree bit for bit.
    CHECK(kd.radii == brute.radii);
    CHECK(kd.neighbors == brute.neighbors);
  }
}

TEST_CASE("query subsets measure distances against the full cloud") {
  const PointCloud cloud = uniform_cloud(150, 3, 3);
  const auto full = build_neighbor_table(cloud, 4);
  const std::vector<Index> query{5, 17, 149};
  const auto sub = build_neighbor_table(cloud, 4, std::span<const Index>(query));
  REQUIRE(sub.rows() == 3);
  for (Index r = 0; r < 3; ++r) CHECK(sub.radii.row(r) == full.radii.row(query[static_cast<std::size_t>(r)]));
}

TEST_CASE("single-precision clouds") {
  PointCloudT<float> cloud(4, 1);
  cloud << 0.f, 1.f, 3.f, 7.f;
  const auto t = build_neighbor_table(cloud, 2);
  CHECK(t.radii(3, 0) == doctest::Approx(4.0f));
  CHECK(t.radii(3, 1) == doctest::Approx(6.0f));
}
