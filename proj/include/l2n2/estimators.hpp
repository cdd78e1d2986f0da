#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "l2n2/calibration.hpp"
#include "l2n2/neighbors.hpp"

namespace l2n2 {

enum class Method { L2N2, MLE };

std::string_view to_string(Method method);

struct EstimateReport {
  Method method = Method::L2N2;
  double d_hat = 0;
  int d_rounded = 1;
  KJPair pair;            // for MLE: (k, 1) with k the neighbor count
  Index n = 0;            // points in the cloud
  Index query_size = 0;   // points the statistic was averaged over
  double mean_l = 0;      // mean L_{k,j}; for MLE the mean of the per-point estimates
  Index excluded_count = 0;
  std::string calibration_key;
  std::vector<std::string> warnings;
  std::vector<double> point_values;  // per-query statistic, when requested
};

struct EstimateOptions {
  /// Relative mismatch between the cloud size and the calibration n beyond
  /// which the report carries a warning.
  double n_tolerance = 0.2;
  bool keep_point_values = false;
  KnnAlgorithm knn = KnnAlgorithm::Auto;
};

/// Nearest integer, halves rounded up, never below 1.
int round_dimension(double d_hat);

/// exp(est_alpha * mean_l + est_beta).
double dimension_from_mean(double mean_l, const CalibrationEntry& cal);

/// L2N2 estimate from the mean of L_{k,j} over `query` (all points when empty).
EstimateReport estimate_l2n2(const PointCloud& cloud, const KJPair& pair, const CalibrationEntry& cal,
                             std::span<const Index> query = {}, const EstimateOptions& opts = {});

/// Uniform random query subset of `subset_size` points (seeded), distances
/// still measured against the whole cloud.
EstimateReport estimate_subsampled(const PointCloud& cloud, const KJPair& pair,
                                   const CalibrationEntry& cal, Index subset_size,
                                   std::uint64_t seed, const EstimateOptions& opts = {});

/// Levina-Bickel maximum-likelihood estimate averaged over query points:
///   m(x) = (k - 1) / sum_{m=1}^{k-1} log(R_k / R_m).
/// For k = 2 this is the mean of 1 / log(R_2 / R_1).
EstimateReport estimate_mle(const PointCloud& cloud, int k, std::span<const Index> query = {},
                            const EstimateOptions& opts = {});

std::string report_json(const EstimateReport& report, int indent = 2);
std::string report_text(const EstimateReport& report);

}  // namespace l2n2
