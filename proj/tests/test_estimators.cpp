#include <doctest.h>

#include <cmath>
#include <numbers>

#include <json.hpp>

#include "l2n2/calibration.hpp"
#include "l2n2/constants.hpp"
#include "l2n2/estimators.hpp"

using namespace l2n2;

namespace {

CalibrationEntry entry_at(Index n, KJPair pair, double alpha_fit, double beta_fit) {
  CalibrationSpec s;
  s.n = n;
  s.pair = pair;
  return make_entry(s, alpha_fit, beta_fit, 0, 0);
}

}  // namespace

TEST_CASE("rounding") {
  CHECK(round_dimension(1.1) == 1);
  CHECK(round_dimension(9.96) == 10);
  CHECK(round_dimension(0.4) == 1);
  CHECK(round_dimension(2.5) == 3);
  CHECK_THROWS_AS(round_dimension(0.0), Error);
  CHECK_THROWS_AS(round_dimension(-1.0), Error);
  CHECK_THROWS_AS(round_dimension(std::nan("")), Error);
}

TEST_CASE("identity calibration maps mean L = log 10 to 10") {
  const CalibrationEntry cal = entry_at(2500, {2, 1}, 1.0, 0.0);
  CHECK(dimension_from_mean(std::log(10.0), cal) == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("hand-computed L2N2 on a tiny cloud") {
  // Every point's two nearest distances are 1 and e: mean L = 0.
  PointCloud cloud(4, 2);
  const double e = std::numbers::e;
  cloud << 0, 0, 1, 0, 0, e, 1 + 0.5 * std::sqrt(4 * e * e - 1), 100;
  const std::vector<Index> query{0};
  const CalibrationEntry cal = entry_at(4, {2, 1}, 0.5, -0.3);
  const EstimateReport r = estimate_l2n2(cloud, {2, 1}, cal, query);
  CHECK(r.mean_l == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r.d_hat == doctest::Approx(std::exp(0.6)));
  CHECK(r.query_size == 1);
  CHECK(r.n == 4);
  CHECK(r.calibration_key == "n=4,k=2,j=1,d=1-20");
}

TEST_CASE("mismatched pair and n") {
  PointCloud cloud(200, 2);
  cloud.setRandom();
  CHECK_THROWS_AS(estimate_l2n2(cloud, {4, 2}, entry_at(200, {2, 1}, 1, 0)), Error);
  const EstimateReport r = estimate_l2n2(cloud, {2, 1}, entry_at(2500, {2, 1}, 1, 0));
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("n=2500") != std::string::npos);
  CHECK(estimate_l2n2(cloud, {2, 1}, entry_at(220, {2, 1}, 1, 0)).warnings.empty());
}

TEST_CASE("MLE with R2/R1 = e is 1") {
  PointCloud cloud(3, 1);
  cloud << 0, 1, -std::numbers::e;
  const std::vector<Index> query{0};
  const EstimateReport r = estimate_mle(cloud, 2, query);
  CHECK(r.d_hat == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.method == Method::MLE);
  CHECK_THROWS_AS(estimate_mle(cloud, 1), Error);
}

TEST_CASE("MLE on a large Gaussian cloud") {
  const PointCloud cloud = sample_gaussian_cloud(3, 4000, 9);
  const EstimateReport r = estimate_mle(cloud, 10);
  CHECK(r.d_hat == doctest::Approx(3.0).epsilon(0.1));
}

TEST_CASE("asymptotic coefficients recover low dimensions") {
  const PointCloud cloud = sample_gaussian_cloud(2, 4000, 10);
  const EstimateReport r = estimate_l2n2(cloud, {2, 1}, asymptotic_entry({2, 1}));
  CHECK(r.d_rounded == 2);
}

TEST_CASE("subsampled estimate") {
  const PointCloud cloud = sample_gaussian_cloud(4, 3000, 3);
  const CalibrationEntry cal = entry_at(3000, {2, 1}, 1, c_kj_exact({2, 1}));
  const EstimateReport a = estimate_subsampled(cloud, {2, 1}, cal, 500, 1);
  CHECK(a.query_size == 500);
  CHECK(a.n == 3000);
  CHECK(a.d_hat == estimate_subsampled(cloud, {2, 1}, cal, 500, 1).d_hat);
  CHECK(estimate_subsampled(cloud, {2, 1}, cal, 3000, 1).d_hat ==
        doctest::Approx(estimate_l2n2(cloud, {2, 1}, cal).d_hat).epsilon(1e-12));
  CHECK_THROWS_AS(estimate_subsampled(cloud, {2, 1}, cal, 3001, 1), Error);
}

TEST_CASE("JSON report") {
  PointCloud cloud(4, 1);
  cloud << 0, 0, 2, 3;
  EstimateOptions opts;
  opts.keep_point_values = true;
  const EstimateReport r = estimate_l2n2(cloud, {2, 1}, entry_at(4, {2, 1}, 1, 0), {}, opts);
  const auto j = nlohmann::json::parse(report_json(r));
  CHECK(j["method"] == "l2n2");
  CHECK(j["k"] == 2);
  CHECK(j["j"] == 1);
  CHECK(j["excluded_count"] == 2);
  CHECK(j["point_values"][0].is_null());
  CHECK(j["point_values"][2].is_number());
  CHECK(report_json(r) == report_json(r));
  CHECK(report_text(r).find("d_hat") != std::string::npos);
}
