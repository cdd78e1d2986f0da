#include <doctest.h>

#include <cmath>
#include <numbers>

#include "l2n2/calibration.hpp"
#include "l2n2/lstat.hpp"
#include "l2n2/random.hpp"

using namespace l2n2;

namespace {

NeighborTable table_from_radii(std::initializer_list<std::initializer_list<double>> rows) {
  NeighborTable t;
  t.kmax = static_cast<int>(rows.begin()->size());
  t.radii.resize(static_cast<Index>(rows.size()), t.kmax);
  t.neighbors.setZero(static_cast<Index>(rows.size()), t.kmax);
  Index r = 0;
  for (const auto& row : rows) {
    Index c = 0;
    for (double v : row) t.radii(r, c++) = v;
    t.query.push_back(r++);
  }
  return t;
}

PointCloud uniform_square(Index n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointCloud c(n, 2);
  for (Index i = 0; i < c.size(); ++i) c.data()[i] = u(rng);
  return c;
}

Eigen::MatrixXd random_rotation(Index d, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(d, d);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return qr.householderQ();
}

}  // namespace

TEST_CASE("log identities") {
  const double e = std::numbers::e;
  const auto t = table_from_radii({{1.0, e}, {1.0, std::exp(e)}});
  CHECK(l_stat(t, 0, {2, 1, {}}).value == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(l_stat(t, 1, {2, 1, {}}).value == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("collinear cloud, point at the origin") {
  PointCloud cloud(3, 1);
  cloud << 0, 1, 3;
  const auto t = build_neighbor_table(cloud, 2);
  const LValue v = l_stat(t, 0, {2, 1, {}});
  CHECK(v.status == LStatus::Ok);
  CHECK(v.value == doctest::Approx(-std::log(std::log(3.0))).epsilon(1e-15));
  CHECK(v.value == doctest::Approx(-0.09405).epsilon(1e-4));
}

TEST_CASE("degenerate ratios are excluded and counted") {
  const auto t = table_from_radii({{0.0, 1.0}, {2.0, 2.0}, {1.0, std::numbers::e}});
  CHECK(l_stat(t, 0, {2, 1, {}}).status == LStatus::Degenerate);
  CHECK(l_stat(t, 1, {2, 1, {}}).status == LStatus::Degenerate);
  const LStatMean m = l_stat_mean(t, {2, 1, {}});
  CHECK(m.excluded_count == 2);
  CHECK(m.used_count == 1);
  CHECK(m.mean == doctest::Approx(0.0));
  CHECK(m.warnings.size() == 1);

  const auto all_bad = table_from_radii({{0.0, 0.0}, {1.0, 1.0}});
  try {
    l_stat_mean(all_bad, {2, 1, {}});
    FAIL("expected empty-statistic");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyStatistic);
  }
}

TEST_CASE("truncation contributes zero and is counted") {
  const double e = std::numbers::e;
  const auto t = table_from_radii({{1.0, std::exp(e)}, {0.1, 0.1 * std::exp(e)}});
  const LStatConfig cfg{2, 1, 2.0};
  CHECK(l_stat(t, 0, cfg).status == LStatus::Truncated);
  CHECK(l_stat(t, 0, cfg).value == 0.0);
  const LStatMean m = l_stat_mean(t, cfg);
  CHECK(m.truncated_count == 1);
  CHECK(m.used_count == 2);
  CHECK(m.mean == doctest::Approx(-0.5));
}

TEST_CASE("config validation") {
  const auto t = table_from_radii({{1.0, 2.0}});
  CHECK_THROWS_AS(l_stat(t, 0, {3, 1, {}}), Error);
  CHECK_THROWS_AS(l_stat(t, 0, {1, 1, {}}), Error);
  CHECK_THROWS_AS(l_stat(t, 0, {2, 1, -1.0}), Error);
}

TEST_CASE("query subset of one point") {
  // Two points at distance 1 and a third at distance e from the first.
  PointCloud cloud(3, 2);
  cloud << 0, 0, 1, 0, 0, std::numbers::e;
  const std::vector<Index> query{0};
  const LStatMean m = l_stat_mean(cloud, {2, 1, {}}, std::span<const Index>(query));
  CHECK(m.mean == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(m.used_count == 1);
}

TEST_CASE("query subset of every index equals the full mean") {
  const PointCloud cloud = uniform_square(300, 5);
  std::vector<Index> all(300);
  std::iota(all.begin(), all.end(), Index{0});
  CHECK(l_stat_mean(cloud, {2, 1, {}}).mean ==
        l_stat_mean(cloud, {2, 1, {}}, std::span<const Index>(all)).mean);
}

TEST_CASE("property: scale invariance") {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const PointCloud cloud = sample_gaussian_cloud(3 + trial % 4, 400, rng());
    const double base = l_stat_mean(cloud, {2, 1, {}}).mean;
    for (double c : {1e-3, 7.5, 1e3}) {
      const PointCloud scaled = c * cloud;
      CHECK(l_stat_mean(scaled, {2, 1, {}}).mean == doctest::Approx(base).epsilon(1e-12));
    }
  }
}

TEST_CASE("property: rigid motions leave every L unchanged") {
  Rng rng(23);
  for (int trial = 0; trial < 8; ++trial) {
    const Index d = 2 + trial;
    const PointCloud cloud = sample_gaussian_cloud(static_cast<int>(d), 300, rng());
    const Eigen::MatrixXd rot = random_rotation(d, rng);
    const Eigen::RowVectorXd shift = Eigen::RowVectorXd::Random(d) * 10.0;
    const PointCloud moved = (cloud * rot.transpose()).rowwise() + shift;
    const auto a = l_values(build_neighbor_table(cloud, 4), {4, 2, {}});
    const auto b = l_values(build_neighbor_table(moved, 4), {4, 2, {}});
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i].value - b[i].value) < 1e-9);
  }
}

TEST_CASE("property: L_{k,j} decreases in k for fixed j") {
  const PointCloud cloud = sample_gaussian_cloud(5, 500, 3);
  const auto t = build_neighbor_table(cloud, 8);
  for (Index r = 0; r < t.rows(); ++r)
    for (int k = 3; k <= 8; ++k) {
      const LValue hi = l_stat(t, r, {k - 1, 1, {}});
      const LValue lo = l_stat(t, r, {k, 1, {}});
      if (hi.status == LStatus::Ok && lo.status == LStatus::Ok) CHECK(lo.value <= hi.value);
    }
}

TEST_CASE("property: truncation is negligible on the unit square") {
  int identical = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const PointCloud cloud = uniform_square(500, derive_seed(99, {std::uint64_t(trial)}));
    const auto table = build_neighbor_table(cloud, 2);
    const double plain = l_stat_mean(table, {2, 1, {}}).mean;
    const double truncated = l_stat_mean(table, {2, 1, 0.5}).mean;
    identical += plain == truncated;
  }
  CHECK(identical >= 99);
}
