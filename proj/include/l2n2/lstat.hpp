#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "l2n2/neighbors.hpp"

namespace l2n2 {

/// Which ratio R_k / R_j to use, plus the optional truncation radius r of the
/// truncated statistic L_{k,j,r} = L_{k,j} * 1{R_k <= r}.
struct LStatConfig {
  int k = 2;
  int j = 1;
  std::optional<double> truncation_radius;

  KJPair pair() const { return {k, j}; }
};

inline void validate(const LStatConfig& cfg) {
  validate(cfg.pair());
  if (cfg.truncation_radius && !(*cfg.truncation_radius > 0))
    throw Error(ErrorCode::InvalidArgument, "truncation radius must be positive");
}

enum class LStatus { Ok, Truncated, Degenerate };

struct LValue {
  double value = 0;
  LStatus status = LStatus::Ok;
};

/// -log(log(rk / rj)) or a Degenerate marker when rj == 0 or rk == rj.
inline LValue loglog_ratio(double rj, double rk) {
  if (!(rj > 0) || !(rk > rj)) return {0.0, LStatus::Degenerate};
  return {-std::log(std::log(rk / rj)), LStatus::Ok};
}

/// L_{k,j} of table row `row`. With a truncation radius, points whose k-th
/// neighbor lies beyond r contribute 0 and are marked Truncated.
template <typename Scalar>
LValue l_stat(const NeighborTableT<Scalar>& table, Index row, const LStatConfig& cfg) {
  validate(cfg);
  if (cfg.k > table.kmax)
    throw Error(ErrorCode::InvalidArgument, "k=" + std::to_string(cfg.k) +
                                                " exceeds neighbor table kmax=" +
                                                std::to_string(table.kmax));
  if (row < 0 || row >= table.rows())
    throw Error(ErrorCode::InvalidArgument, "row " + std::to_string(row) + " out of range");
  const double rk = static_cast<double>(table.radii(row, cfg.k - 1));
  const double rj = static_cast<double>(table.radii(row, cfg.j - 1));
  if (cfg.truncation_radius && rk > *cfg.truncation_radius) return {0.0, LStatus::Truncated};
  return loglog_ratio(rj, rk);
}

template <typename Scalar>
std::vector<LValue> l_values(const NeighborTableT<Scalar>& table, const LStatConfig& cfg) {
  std::vector<LValue> out(static_cast<std::size_t>(table.rows()));
  for (Index r = 0; r < table.rows(); ++r) out[static_cast<std::size_t>(r)] = l_stat(table, r, cfg);
  return out;
}

struct LStatMean {
  double mean = 0;
  Index excluded_count = 0;   // degenerate ratios left out of the average
  Index truncated_count = 0;  // rows zeroed by the truncation indicator
  Index used_count = 0;       // rows in the denominator
  std::vector<std::string> warnings;
};

/// Exclusions above this fraction of the queries raise a warning.
inline constexpr double kExclusionWarnFraction = 0.01;

/// Mean of L over the table rows, summed in row order.
template <typename Scalar>
LStatMean l_stat_mean(const NeighborTableT<Scalar>& table, const LStatConfig& cfg) {
  LStatMean result;
  double sum = 0;
  for (Index r = 0; r < table.rows(); ++r) {
    const LValue v = l_stat(table, r, cfg);
    switch (v.status) {
      case LStatus::Degenerate: ++result.excluded_count; continue;
      case LStatus::Truncated: ++result.truncated_count; break;
      case LStatus::Ok: break;
    }
    sum += v.value;
    ++result.used_count;
  }
  if (result.used_count == 0)
    throw Error(ErrorCode::EmptyStatistic, "every query point was excluded (" +
                                               std::to_string(result.excluded_count) +
                                               " degenerate ratios)");
  result.mean = sum / static_cast<double>(result.used_count);
  if (static_cast<double>(result.excluded_count) >
      kExclusionWarnFraction * static_cast<double>(table.rows()))
    result.warnings.push_back(std::to_string(result.excluded_count) + " of " +
                              std::to_string(table.rows()) +
                              " query points excluded for tied or duplicate neighbors");
  return result;
}

/// Average L_{k,j} over the query rows (all rows when query is empty), with
/// neighbors always taken from the full cloud.
template <typename Scalar>
LStatMean l_stat_mean(const PointCloudT<Scalar>& cloud, const LStatConfig& cfg,
                      std::span<const Index> query = {},
                      KnnAlgorithm algo = KnnAlgorithm::Auto) {
  validate(cfg);
  const auto table = query.empty() ? build_neighbor_table(cloud, cfg.k, algo)
                                   : build_neighbor_table(cloud, cfg.k, query, algo);
  return l_stat_mean(table, cfg);
}

}  // namespace l2n2
