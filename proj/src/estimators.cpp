#include "l2n2/estimators.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "l2n2/lstat.hpp"
#include "l2n2/random.hpp"

namespace l2n2 {

std::string_view to_string(Method method) {
  return method == Method::L2N2 ? "l2n2" : "mle";
}

int round_dimension(double d_hat) {
  if (!(d_hat > 0) || !std::isfinite(d_hat))
    throw Error(ErrorCode::InvalidArgument, "dimension estimate must be positive and finite");
  return std::max(1, static_cast<int>(std::floor(d_hat + 0.5)));
}

double dimension_from_mean(double mean_l, const CalibrationEntry& cal) {
  return std::exp(cal.est_alpha * mean_l + cal.est_beta);
}

EstimateReport estimate_l2n2(const PointCloud& cloud, const KJPair& pair, const CalibrationEntry& cal,
                             std::span<const Index> query, const EstimateOptions& opts) {
  validate(pair);
  if (!(cal.spec.pair == pair))
    throw Error(ErrorCode::InvalidArgument,
                "calibration " + cal.key() + " does not match (k,j)=(" + std::to_string(pair.k) +
                    "," + std::to_string(pair.j) + ")");

  const LStatConfig cfg{pair.k, pair.j, {}};
  const auto table = query.empty() ? build_neighbor_table(cloud, pair.k, opts.knn)
                                   : build_neighbor_table(cloud, pair.k, query, opts.knn);
  const LStatMean stat = l_stat_mean(table, cfg);

  EstimateReport report;
  report.method = Method::L2N2;
  report.pair = pair;
  report.n = cloud.rows();
  report.query_size = table.rows();
  report.mean_l = stat.mean;
  report.excluded_count = stat.excluded_count;
  report.d_hat = dimension_from_mean(stat.mean, cal);
  report.d_rounded = round_dimension(report.d_hat);
  report.calibration_key = cal.key();
  report.warnings = stat.warnings;
  if (cal.spec.n > 0) {
    const double rel = std::abs(static_cast<double>(cloud.rows() - cal.spec.n)) /
                       static_cast<double>(cal.spec.n);
    if (rel > opts.n_tolerance)
      report.warnings.push_back("cloud has n=" + std::to_string(cloud.rows()) +
                                " but calibration " + cal.key() + " was fitted at n=" +
                                std::to_string(cal.spec.n));
  }
  if (opts.keep_point_values)
    for (const LValue& v : l_values(table, cfg))
      report.point_values.push_back(v.status == LStatus::Ok ? v.value : std::nan(""));
  return report;
}

EstimateReport estimate_subsampled(const PointCloud& cloud, const KJPair& pair,
                                   const CalibrationEntry& cal, Index subset_size,
                                   std::uint64_t seed, const EstimateOptions& opts) {
  if (subset_size < 1 || subset_size > cloud.rows())
    throw Error(ErrorCode::InvalidArgument, "subset size " + std::to_string(subset_size) +
                                                " outside [1, " + std::to_string(cloud.rows()) +
                                                "]");
  Rng rng(seed);
  const auto query = sample_indices<Index>(cloud.rows(), subset_size, rng);
  return estimate_l2n2(cloud, pair, cal, query, opts);
}

EstimateReport estimate_mle(const PointCloud& cloud, int k, std::span<const Index> query,
                            const EstimateOptions& opts) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "MLE needs k >= 2");
  const auto table = query.empty() ? build_neighbor_table(cloud, k, opts.knn)
                                   : build_neighbor_table(cloud, k, query, opts.knn);

  EstimateReport report;
  report.method = Method::MLE;
  report.pair = {k, 1};
  report.n = cloud.rows();
  report.query_size = table.rows();
  double sum = 0;
  Index used = 0;
  for (Index r = 0; r < table.rows(); ++r) {
    const double rk = table.radii(r, k - 1);
    double log_sum = 0;
    bool degenerate = !(table.radii(r, 0) > 0);
    for (int m = 0; m < k - 1 && !degenerate; ++m) log_sum += std::log(rk / table.radii(r, m));
    degenerate = degenerate || !(log_sum > 0);
    if (degenerate) {
      ++report.excluded_count;
      if (opts.keep_point_values) report.point_values.push_back(std::nan(""));
      continue;
    }
    const double local = (k - 1) / log_sum;
    sum += local;
    ++used;
    if (opts.keep_point_values) report.point_values.push_back(local);
  }
  if (used == 0)
    throw Error(ErrorCode::EmptyStatistic, "every query point had tied or duplicate neighbors");
  report.mean_l = sum / static_cast<double>(used);
  report.d_hat = report.mean_l;
  report.d_rounded = round_dimension(report.d_hat);
  if (static_cast<double>(report.excluded_count) >
      kExclusionWarnFraction * static_cast<double>(table.rows()))
    report.warnings.push_back(std::to_string(report.excluded_count) + " of " +
                              std::to_string(table.rows()) +
                              " query points excluded for tied or duplicate neighbors");
  return report;
}

std::string report_json(const EstimateReport& r, int indent) {
  nlohmann::ordered_json j;
  j["method"] = to_string(r.method);
  j["d_hat"] = r.d_hat;
  j["d_rounded"] = r.d_rounded;
  j["k"] = r.pair.k;
  if (r.method == Method::L2N2) j["j"] = r.pair.j;
  j["n"] = r.n;
  j["query_size"] = r.query_size;
  j[r.method == Method::L2N2 ? "mean_l" : "mean_local_estimate"] = r.mean_l;
  j["excluded_count"] = r.excluded_count;
  if (!r.calibration_key.empty()) j["calibration"] = r.calibration_key;
  j["warnings"] = r.warnings;
  if (!r.point_values.empty()) {
    // NaN marks excluded points; JSON has no NaN, so emit null.
    nlohmann::ordered_json values = nlohmann::ordered_json::array();
    for (double v : r.point_values)
      values.push_back(std::isnan(v) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v));
    j["point_values"] = std::move(values);
  }
  return j.dump(indent);
}

std::string report_text(const EstimateReport& r) {
  std::ostringstream out;
  out.precision(6);
  out << "method        " << to_string(r.method) << '\n';
  if (r.method == Method::L2N2)
    out << "pair          (" << r.pair.k << "," << r.pair.j << ")\n";
  else
    out << "k             " << r.pair.k << '\n';
  out << "points        " << r.n << " (queried " << r.query_size << ")\n";
  out << "d_hat         " << r.d_hat << '\n';
  out << "d_rounded     " << r.d_rounded << '\n';
  if (r.method == Method::L2N2) out << "mean L        " << r.mean_l << '\n';
  out << "excluded      " << r.excluded_count << '\n';
  if (!r.calibration_key.empty()) out << "calibration   " << r.calibration_key << '\n';
  for (const auto& w : r.warnings) out << "warning: " << w << '\n';
  return out.str();
}

}  // namespace l2n2
