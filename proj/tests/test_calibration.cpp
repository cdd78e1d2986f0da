#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "l2n2/calibration.hpp"
#include "l2n2/constants.hpp"
#include "l2n2/lstat.hpp"
#include "l2n2/random.hpp"

using namespace l2n2;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("l2n2_cal_" + std::to_string(::getpid()) + "_" + name);
}

CalibrationSpec small_spec() {
  CalibrationSpec s;
  s.n = 300;
  s.d_range = {1, 6};
  s.repetitions = 3;
  s.seed = 42;
  return s;
}

}  // namespace

TEST_CASE("fit_line recovers an exact line and zero stderr") {
  const std::vector<double> x{0, 1, 2, 3};
  const std::vector<double> y{1, 3, 5, 7};
  const LinearFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.slope_stderr == doctest::Approx(0.0));
  CHECK_THROWS_AS(fit_line(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), Error);
}

TEST_CASE("fit_line standard errors match the closed form") {
  const std::vector<double> x{0, 1, 2, 3, 4};
  const std::vector<double> y{0.1, 0.9, 2.2, 2.8, 4.1};
  const LinearFit f = fit_line(x, y);
  // Closed-form simple regression.
  const double xbar = 2, ybar = 2.02;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < 5; ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  const double slope = sxy / sxx;
  const double icpt = ybar - slope * xbar;
  double rss = 0;
  for (int i = 0; i < 5; ++i) rss += std::pow(y[i] - icpt - slope * x[i], 2);
  const double s2 = rss / 3;
  CHECK(f.slope == doctest::Approx(slope));
  CHECK(f.intercept == doctest::Approx(icpt));
  CHECK(f.slope_stderr == doctest::Approx(std::sqrt(s2 / sxx)));
  CHECK(f.intercept_stderr == doctest::Approx(std::sqrt(s2 * (1.0 / 5 + xbar * xbar / sxx))));
}

TEST_CASE("estimator coefficients invert the fit") {
  const CalibrationEntry e = make_entry(small_spec(), 0.9, 0.6, 0.01, 0.02);
  CHECK(e.est_alpha == doctest::Approx(1 / 0.9));
  CHECK(e.est_beta == doctest::Approx(-0.6 / 0.9));
  CHECK(e.est_alpha * e.alpha_fit == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(e.est_alpha * e.beta_fit + e.est_beta == doctest::Approx(0.0).epsilon(1e-15));
  // Feeding the fitted mean back returns the dimension.
  for (double d : {1.0, 4.0, 17.0}) {
    const double mean_l = 0.9 * std::log(d) + 0.6;
    CHECK(std::exp(e.est_alpha * mean_l + e.est_beta) == doctest::Approx(d));
  }
  const CalibrationEntry a = asymptotic_entry({2, 1});
  CHECK(a.spec.n == 0);
  CHECK(a.alpha_fit == 1);
  CHECK(a.est_beta == doctest::Approx(-c_kj_exact({2, 1})));
  CHECK(e.key() == "n=300,k=2,j=1,d=1-6");
}

TEST_CASE("spec validation") {
  CalibrationSpec s = small_spec();
  s.d_range = {5, 5};
  CHECK_THROWS_AS(validate(s), Error);
  s = small_spec();
  s.repetitions = 0;
  CHECK_THROWS_AS(validate(s), Error);
  s = small_spec();
  s.n = 2;
  CHECK_THROWS_AS(validate(s), Error);
  s = small_spec();
  s.pair = {2, 2};
  CHECK_THROWS_AS(validate(s), Error);
}

TEST_CASE("calibration samples reproduce from their seeds") {
  const CalibrationSpec spec = small_spec();
  const CalibrationRun run = calibrate_run(spec);
  REQUIRE(run.samples.size() == 18);
  // Recompute one cell independently.
  const auto& s = run.samples[7];
  const PointCloud cloud = sample_gaussian_cloud(
      s.d, spec.n, derive_seed(spec.seed, {std::uint64_t(spec.n), std::uint64_t(s.d), std::uint64_t(s.repetition)}));
  CHECK(l_stat_mean(cloud, {2, 1, {}}).mean == s.mean_l);
  CHECK(calibrate(spec) == run.entry);
  CHECK(run.entry.alpha_fit > 0.5);
  CHECK(run.entry.alpha_fit < 1.2);
}

TEST_CASE("several pairs share their clouds") {
  const CalibrationSpec spec = small_spec();
  const std::vector<KJPair> pairs{{2, 1}, {4, 2}};
  const auto runs = calibrate_pairs(spec, pairs);
  REQUIRE(runs.size() == 2);
  CHECK(runs[0].entry == calibrate(spec));
  CalibrationSpec s42 = spec;
  s42.pair = {4, 2};
  CHECK(runs[1].entry == calibrate(s42));
}

TEST_CASE("query cap uses a seeded subset") {
  CalibrationSpec spec = small_spec();
  spec.query_cap = 100;
  const CalibrationEntry a = calibrate(spec);
  CHECK(a == calibrate(spec));
  CHECK(a.spec.query_cap == 100);
  CHECK_FALSE(a.alpha_fit == calibrate(small_spec()).alpha_fit);
}

TEST_CASE("property: table round trip is exact") {
  Rng rng(8);
  std::uniform_real_distribution<double> u(-3, 3);
  std::vector<CalibrationEntry> entries;
  for (int i = 0; i < 12; ++i) {
    CalibrationSpec s;
    s.n = 100 + 37 * i;
    s.pair = {2 + i % 5, 1 + i % 2};
    s.d_range = {1 + i % 3, 20 + i};
    s.repetitions = 1 + i;
    s.seed = rng();
    if (i % 2) s.query_cap = 50 + i;
    entries.push_back(make_entry(s, u(rng), u(rng), std::abs(u(rng)) * 1e-3, 1e-17 * i));
  }
  const fs::path p = temp_file("round.txt");
  save_table(entries, p);
  CHECK(load_table(p) == entries);
  fs::remove(p);
}

TEST_CASE("table format errors") {
  const fs::path p = temp_file("bad.txt");
  std::ofstream(p) << "l2n2-calibration-table version=2\n";
  try {
    load_table(p);
    FAIL("expected format-error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FormatError);
  }
  std::ofstream(p) << kTableHeader << "\n2500 2 1 1 20\n";
  CHECK_THROWS_AS(load_table(p), Error);
  fs::remove(p);
  CHECK_THROWS_AS(load_table(temp_file("missing.txt")), Error);
}

TEST_CASE("lookup") {
  std::vector<CalibrationEntry> entries;
  for (Index n : {625, 2500}) {
    CalibrationSpec s;
    s.n = n;
    entries.push_back(make_entry(s, 1, 0, 0, 0));
  }
  CHECK(lookup(entries, {2500, {2, 1}, {1, 20}}).spec.n == 2500);
  try {
    lookup(entries, {2000, {2, 1}, {1, 20}});
    FAIL("expected no-calibration");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoCalibration);
    CHECK(std::string(e.what()).find("nearest available n=2500") != std::string::npos);
  }
  CHECK_THROWS_AS(lookup(entries, {2500, {4, 2}, {1, 20}}), Error);
  CHECK_THROWS_AS(lookup(entries, {2500, {2, 1}, {10, 40}}), Error);

  const NearestMatch m = lookup_nearest(entries, {1562, {2, 1}, {1, 20}});
  CHECK(m.entry->spec.n == 625);  // equidistant: smaller n wins
  CHECK_FALSE(m.exact);
  CHECK(lookup_nearest(entries, {5000, {2, 1}, {1, 20}}).entry->spec.n == 2500);
}

TEST_CASE("shipped default table") {
  const auto table = load_table(default_table_path());
  for (Index n : {625, 1250, 2500, 5000})
    for (KJPair p : {KJPair{2, 1}, KJPair{4, 2}, KJPair{8, 4}}) {
      CAPTURE(n);
      CAPTURE(p.k);
      const CalibrationEntry& e = lookup(table, {n, p, {1, 20}});
      CHECK(e.alpha_fit > 0.5);
      CHECK(e.alpha_fit < 1.1);
      CHECK(e.alpha_fit_stderr > 0);
    }
}
