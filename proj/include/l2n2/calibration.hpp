#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "l2n2/types.hpp"

namespace l2n2 {

struct DimRange {
  int min = 1;
  int max = 20;

  friend bool operator==(const DimRange&, const DimRange&) = default;
};

/// One tuning run: `repetitions` standard-Gaussian clouds of `n` points for
/// every dimension in `d_range`.
struct CalibrationSpec {
  Index n = 2500;
  KJPair pair;
  DimRange d_range;
  int repetitions = 1000;
  std::uint64_t seed = 0;
  // Average L over this many random query points (distances still use all n)
  // when n exceeds it.
  std::optional<Index> query_cap;

  friend bool operator==(const CalibrationSpec&, const CalibrationSpec&) = default;
};

void validate(const CalibrationSpec& spec);

/// Least-squares fit mean_L ~ alpha_fit * log(d) + beta_fit, plus the inverted
/// coefficients consumed by the estimator: d_hat = exp(est_alpha * mean_L + est_beta).
struct CalibrationEntry {
  CalibrationSpec spec;
  double alpha_fit = 1;
  double beta_fit = 0;
  double alpha_fit_stderr = 0;
  double beta_fit_stderr = 0;
  double est_alpha = 1;
  double est_beta = 0;

  /// "n=2500,k=2,j=1,d=1-20"; n=0 marks the asymptotic entry.
  std::string key() const;

  friend bool operator==(const CalibrationEntry&, const CalibrationEntry&) = default;
};

/// Fills est_alpha = 1 / alpha_fit and est_beta = -beta_fit / alpha_fit.
CalibrationEntry make_entry(const CalibrationSpec& spec, double alpha_fit, double beta_fit,
                            double alpha_stderr, double beta_stderr);

/// The n -> infinity coefficients: alpha_fit = 1, beta_fit = C_{k,j}.
CalibrationEntry asymptotic_entry(const KJPair& pair);

/// n i.i.d. standard normal points in R^d.
PointCloud sample_gaussian_cloud(int d, Index n, std::uint64_t seed);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double slope_stderr = 0;
  double intercept_stderr = 0;
  double residual_sd = 0;
};

/// Ordinary least squares y ~ slope * x + intercept with classical standard errors.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

struct QuadraticTerm {
  double coefficient = 0;
  double std_error = 0;
  double t_stat() const { return std_error > 0 ? coefficient / std_error : 0.0; }
};

/// Coefficient of x^2 in the OLS fit y ~ a + b x + c x^2.
QuadraticTerm quadratic_term(std::span<const double> x, std::span<const double> y);

/// Mean L of one calibration cloud.
struct CalibrationSample {
  int d = 0;
  int repetition = 0;
  double mean_l = 0;
};

struct CalibrationRun {
  CalibrationEntry entry;
  std::vector<CalibrationSample> samples;
};

/// Runs the tuning stage for spec.pair. Deterministic per spec.seed.
CalibrationRun calibrate_run(const CalibrationSpec& spec);
CalibrationEntry calibrate(const CalibrationSpec& spec);

/// Same clouds, several (k, j) pairs; spec.pair is ignored.
std::vector<CalibrationRun> calibrate_pairs(const CalibrationSpec& spec,
                                            std::span<const KJPair> pairs);

struct CalibrationKey {
  Index n = 0;
  KJPair pair;
  DimRange d_range;
};

inline CalibrationKey key_of(const CalibrationEntry& e) {
  return {e.spec.n, e.spec.pair, e.spec.d_range};
}

/// Text table: a version line, then one whitespace-separated record per entry.
inline constexpr const char* kTableHeader = "l2n2-calibration-table version=1";

void save_table(std::span<const CalibrationEntry> entries, const std::filesystem::path& path);
std::vector<CalibrationEntry> load_table(const std::filesystem::path& path);

/// Exact key match; NoCalibration error naming the nearest available n otherwise.
const CalibrationEntry& lookup(std::span<const CalibrationEntry> entries, const CalibrationKey& key);

struct NearestMatch {
  const CalibrationEntry* entry = nullptr;
  bool exact = false;
};

/// Entry with the same pair and range whose n is closest to key.n (ties go to
/// the smaller n). NoCalibration error if no entry has that pair and range.
NearestMatch lookup_nearest(std::span<const CalibrationEntry> entries, const CalibrationKey& key);

/// The table shipped in data/.
std::filesystem::path default_table_path();

}  // namespace l2n2
