#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "l2n2/calibration.hpp"
#include "l2n2/estimators.hpp"
#include "l2n2/manifolds.hpp"

namespace l2n2 {

/// Mean percentage error 100 * |d_hat - d| / d.
double mpe(double d_hat, int d_true);

/// One estimator configuration of an experiment.
struct MethodConfig {
  Method method = Method::L2N2;
  KJPair pair;               // MLE uses pair.k as its neighbor count
  bool round = false;        // score the rounded estimate
  bool asymptotic = false;   // L2N2 with (1, -C_{k,j}) instead of a fitted entry
  std::optional<Index> subset;  // query-subset size for L2N2
  DimRange d_range;          // calibration range for L2N2

  /// Stable identifier, e.g. "l2n2(2,1)", "l2n2(2,1)r", "l2n2(2,1)[d10-40]",
  /// "l2n2(2,1)sub2500", "mle(10)".
  std::string id() const;
};

/// Parses "l2n2:K:J[:opt...]" or "mle:K". Options: "r" (round), "asym",
/// "sub=N", "d=LO-HI".
MethodConfig parse_method(std::string_view text);

/// Manifold label used as a report key; benchmark ids without noise keep
/// their name, everything else spells out its parameters.
std::string label(const ManifoldSpec& spec);

struct ExperimentPlan {
  std::vector<ManifoldSpec> suite;  // n and seed are taken from the plan
  std::vector<MethodConfig> methods;
  int repetitions = 20;
  std::vector<Index> n_list;
  std::uint64_t seed = 0;
  std::filesystem::path output;       // optional; JSON, with a .csv sibling
  std::filesystem::path calibration;  // empty: shipped default table
  bool optimize = false;              // add grid-refined (alpha, beta) per L2N2 method and n
};

void validate(const ExperimentPlan& plan);

/// One estimator call.
struct CellResult {
  std::string manifold;
  std::string method;
  Index n = 0;
  int repetition = 0;
  int d_true = 0;
  double d_hat = 0;
  double mean_l = 0;
  double runtime_ms = 0;
  std::string error;  // non-empty when the cell failed
};

/// Aggregate over the repetitions of one (manifold, method, n).
struct SummaryRow {
  std::string manifold;
  std::string method;
  Index n = 0;
  int d_true = 0;
  int runs = 0;
  int failures = 0;
  double mean_mpe = 0;
  double std_mpe = 0;
  double mean_d_hat = 0;
  double std_d_hat = 0;
  double rounded_accuracy = 0;  // fraction of runs whose rounded estimate equals d_true
  double median_runtime_ms = 0;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
};

/// Mean over manifolds of the per-manifold mean MPE.
struct SuiteRow {
  std::string method;
  Index n = 0;
  int manifolds = 0;
  double mean_mpe = 0;
};

/// Grid-refined estimator coefficients minimizing suite mean MPE.
struct OptimizedRow {
  std::string method;
  Index n = 0;
  double est_alpha = 0;
  double est_beta = 0;
  double suite_mpe = 0;
};

struct BenchReport {
  std::vector<CellResult> cells;  // sorted by (manifold, method, n, repetition)
  std::vector<SummaryRow> rows;   // sorted by (manifold, method, n)
  std::vector<SuiteRow> suite;    // sorted by (method, n)
  std::vector<OptimizedRow> optimized;
  std::uint64_t seed = 0;
  int repetitions = 0;
};

/// Runs every (manifold, n, repetition) cell with every method. Cell
/// failures are recorded, never thrown. Deterministic per plan.seed: each
/// cloud is seeded from (seed, manifold, n, repetition) and each method's own
/// randomness from (seed, manifold, method, n, repetition).
BenchReport run_plan(const ExperimentPlan& plan);
BenchReport run_plan(const ExperimentPlan& plan, std::span<const CalibrationEntry> table);

/// Canonical JSON. With include_timing = false the output depends only on
/// the plan, so identical plans give byte-identical text.
std::string to_json(const BenchReport& report, bool include_timing = true);
/// Summary rows flattened to CSV for plotting.
std::string to_csv(const BenchReport& report);
/// Writes JSON to `path` and CSV next to it (same stem, .csv).
void write_report(const BenchReport& report, const std::filesystem::path& path);

/// Coarse-to-fine grid search for (est_alpha, est_beta) given per-run mean L
/// and ground truth, minimizing the mean over manifolds of the mean MPE.
OptimizedRow optimize_coefficients(std::span<const CellResult> cells, double alpha0, double beta0);

// Canned plans.

/// S^d in R^ambient for each d, each sigma.
ExperimentPlan noise_sweep_plan(std::span<const int> dims, int ambient, std::span<const double> sigmas,
                                Index n, int repetitions, std::uint64_t seed,
                                std::vector<MethodConfig> methods);

/// S^d in R^{d+1} for each d.
ExperimentPlan sphere_ladder_plan(std::span<const int> dims, Index n, int repetitions,
                                  std::uint64_t seed, std::vector<MethodConfig> methods);

/// Fitted (alpha, beta) across sample sizes.
std::vector<CalibrationEntry> calib_study(std::span<const Index> n_list, const KJPair& pair,
                                          DimRange range, int repetitions, std::uint64_t seed,
                                          std::optional<Index> query_cap);
std::string calib_study_csv(std::span<const CalibrationEntry> entries);

/// Reads the declarative plan format (see README): `key = value` lines,
/// comma-separated lists, `#` comments.
ExperimentPlan parse_plan(std::string_view text);
ExperimentPlan load_plan(const std::filesystem::path& path);

}  // namespace l2n2
