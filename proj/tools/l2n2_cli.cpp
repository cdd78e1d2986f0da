// Command-line front end: constants, calibration, estimation, synthetic data
// and benchmark runs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "l2n2/bench.hpp"
#include "l2n2/calibration.hpp"
#include "l2n2/constants.hpp"
#include "l2n2/estimators.hpp"
#include "l2n2/manifolds.hpp"
#include "l2n2/pointcloud_io.hpp"
#include "l2n2/random.hpp"

namespace fs = std::filesystem;
using namespace l2n2;

namespace {

KJPair parse_pair(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "pair is K:J, got '" + text + "'");
  KJPair p{std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
  validate(p);
  return p;
}

DimRange parse_range(const std::string& text) {
  const auto dash = text.find('-');
  if (dash == std::string::npos) throw Error(ErrorCode::InvalidArgument, "range is LO-HI, got '" + text + "'");
  return {std::stoi(text.substr(0, dash)), std::stoi(text.substr(dash + 1))};
}

std::vector<MethodConfig> parse_methods(const std::vector<std::string>& items) {
  std::vector<MethodConfig> out;
  for (const auto& s : items) out.push_back(parse_method(s));
  return out;
}

void print_summary(const BenchReport& report) {
  std::cout << std::left << std::setw(34) << "manifold" << std::setw(24) << "method" << std::right
            << std::setw(7) << "n" << std::setw(4) << "d" << std::setw(10) << "d_hat" << std::setw(9)
            << "sd" << std::setw(9) << "MPE" << std::setw(8) << "exact" << std::setw(6) << "fail"
            << '\n';
  std::cout << std::fixed;
  for (const auto& r : report.rows) {
    std::cout << std::left << std::setw(34) << r.manifold << std::setw(24) << r.method << std::right
              << std::setw(7) << r.n << std::setw(4) << r.d_true << std::setprecision(3)
              << std::setw(10) << r.mean_d_hat << std::setw(9) << r.std_d_hat << std::setprecision(2)
              << std::setw(9) << r.mean_mpe << std::setw(8) << r.rounded_accuracy << std::setw(6)
              << r.failures << '\n';
    for (const auto& e : r.errors) std::cout << "    error: " << e << '\n';
    for (const auto& w : r.warnings) std::cout << "    warning: " << w << '\n';
  }
  if (report.suite.size() > 1 || !report.optimized.empty()) {
    std::cout << "\nsuite mean MPE\n";
    for (const auto& s : report.suite)
      std::cout << "  " << std::left << std::setw(24) << s.method << std::right << std::setw(7)
                << s.n << std::setprecision(2) << std::setw(9) << s.mean_mpe << "  (" << s.manifolds
                << " manifolds)\n";
  }
  for (const auto& o : report.optimized)
    std::cout << "optimized " << o.method << " n=" << o.n << std::setprecision(5)
              << ": est_alpha=" << o.est_alpha << " est_beta=" << o.est_beta
              << std::setprecision(2) << " suite MPE=" << o.suite_mpe << '\n';
  std::cout.unsetf(std::ios::fixed);
}

void finish_report(const BenchReport& report, const fs::path& output) {
  print_summary(report);
  if (!output.empty()) {
    write_report(report, output);
    std::cout << "wrote " << output.string() << '\n';
  }
}

// Merges new entries into an existing table, replacing equal keys.
void merge_into(const fs::path& path, const std::vector<CalibrationEntry>& fresh) {
  std::vector<CalibrationEntry> table;
  if (fs::exists(path)) table = load_table(path);
  for (const auto& e : fresh) {
    const auto k = key_of(e);
    std::erase_if(table, [&](const CalibrationEntry& old) {
      const auto o = key_of(old);
      return o.n == k.n && o.pair == k.pair && o.d_range == k.d_range;
    });
    table.push_back(e);
  }
  std::sort(table.begin(), table.end(), [](const CalibrationEntry& a, const CalibrationEntry& b) {
    return std::tie(a.spec.d_range.min, a.spec.d_range.max, a.spec.pair.k, a.spec.pair.j, a.spec.n) <
           std::tie(b.spec.d_range.min, b.spec.d_range.max, b.spec.pair.k, b.spec.pair.j, b.spec.n);
  });
  save_table(table, path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"L2N2 intrinsic dimension estimation"};
  app.require_subcommand(1);

  // constants --------------------------------------------------------------
  auto* constants = app.add_subcommand("constants", "Table of the limit constants C_{k,j}");
  int k_max = 10;
  bool csv = false;
  constants->add_option("--k-max", k_max, "Largest k")->check(CLI::Range(2, 60));
  constants->add_flag("--csv", csv, "Comma-separated output");

  // calibrate --------------------------------------------------------------
  auto* calib = app.add_subcommand("calibrate", "Fit (alpha, beta) on Gaussian clouds");
  std::vector<Index> cal_n{2500};
  std::vector<std::string> cal_pairs{"2:1"};
  std::string cal_range = "1-20";
  int cal_reps = 1000;
  std::uint64_t cal_seed = 0;
  Index cal_query_cap = 0;
  std::string cal_output;
  calib->add_option("-n,--n", cal_n, "Sample sizes")->delimiter(',');
  calib->add_option("--pairs", cal_pairs, "Neighbor pairs K:J")->delimiter(',');
  calib->add_option("--range", cal_range, "Dimension range LO-HI");
  calib->add_option("--repetitions", cal_reps, "Clouds per dimension");
  calib->add_option("--seed", cal_seed, "Master seed");
  calib->add_option("--query-cap", cal_query_cap, "Average L over at most this many points (0: all)");
  calib->add_option("-o,--output", cal_output, "Table to create or merge into");

  // estimate ---------------------------------------------------------------
  auto* est = app.add_subcommand("estimate", "Estimate the intrinsic dimension of a point cloud");
  std::string input, method_name = "l2n2", table_path, est_range = "1-20", est_output;
  int est_k = 2, est_j = 1;
  Index cal_n_key = 0, subset = 0, ingest_subsample = 0;
  std::uint64_t est_seed = 0;
  bool round = false, json = false, asymptotic = false, point_values = false;
  est->add_option("input", input, "CSV/TSV/whitespace text or .bin point cloud")->required();
  est->add_option("--method", method_name, "l2n2 or mle")->check(CLI::IsMember({"l2n2", "mle"}));
  est->add_option("-k", est_k, "Neighbor index k (MLE: neighbor count, default 10)");
  est->add_option("-j", est_j, "Neighbor index j");
  est->add_option("--calibration", table_path, "Calibration table (default: shipped table)");
  est->add_option("--calibration-n", cal_n_key, "Calibration entry n (default: nearest to the cloud size)");
  est->add_option("--range", est_range, "Calibration dimension range LO-HI");
  est->add_flag("--asymptotic", asymptotic, "Use (1, -C_{k,j}) instead of a fitted entry");
  est->add_flag("--round", round, "Print the rounded dimension only");
  est->add_option("--subset", subset, "Average over a random query subset of this size");
  est->add_option("--subsample", ingest_subsample, "Keep a random subset of the rows before estimating");
  est->add_option("--seed", est_seed, "Seed for --subset and --subsample");
  est->add_flag("--json", json, "JSON report");
  est->add_flag("--point-values", point_values, "Include per-point values in the JSON report");
  est->add_option("-o,--output", est_output, "Write the report here instead of stdout");

  // generate ---------------------------------------------------------------
  auto* gen = app.add_subcommand("generate", "Sample a synthetic manifold");
  std::string gen_name, gen_output;
  ManifoldSpec gen_spec;
  bool list = false;
  gen->add_option("name", gen_name, "Benchmark id or sphere/gaussian/cube");
  gen->add_flag("--list", list, "List manifolds");
  gen->add_option("-d", gen_spec.intrinsic_d, "Intrinsic dimension (builtins)");
  gen->add_option("-D", gen_spec.ambient_D, "Ambient dimension (builtins)");
  gen->add_option("-n,--n", gen_spec.n, "Points");
  gen->add_option("--noise", gen_spec.noise_sigma, "Gaussian noise sigma");
  gen->add_option("--seed", gen_spec.seed, "Seed");
  gen->add_option("-o,--output", gen_output, "Output (.bin binary, otherwise CSV)");

  // bench ------------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "Run an experiment plan");
  std::string plan_path, bench_output, bench_calibration;
  bench->add_option("--config", plan_path, "Plan file")->required();
  bench->add_option("-o,--output", bench_output, "Report path (overrides the plan)");
  bench->add_option("--calibration", bench_calibration, "Calibration table (overrides the plan)");

  // canned experiments -----------------------------------------------------
  struct Canned {
    Index n = 2500;
    int repetitions = 20;
    std::uint64_t seed = 0;
    std::vector<std::string> methods;
    std::string output, calibration;
  };
  auto add_canned = [](CLI::App* sub, Canned& c) {
    sub->add_option("-n,--n", c.n, "Points per cloud");
    sub->add_option("--repetitions", c.repetitions, "Clouds per configuration");
    sub->add_option("--seed", c.seed, "Master seed");
    sub->add_option("--methods", c.methods, "Methods (l2n2:K:J[:opt], mle:K)")->delimiter(',');
    sub->add_option("-o,--output", c.output, "Report path");
    sub->add_option("--calibration", c.calibration, "Calibration table");
  };

  auto* noise = app.add_subcommand("noise-sweep", "Spheres under Gaussian noise");
  Canned noise_opts;
  noise_opts.repetitions = 100;
  noise_opts.methods = {"l2n2:2:1", "mle:10"};
  std::vector<int> noise_dims{6, 10};
  std::vector<double> sigmas{0.0, 0.1};
  int noise_ambient = 11;
  add_canned(noise, noise_opts);
  noise->add_option("--dims", noise_dims, "Sphere dimensions")->delimiter(',');
  noise->add_option("--ambient", noise_ambient, "Ambient dimension");
  noise->add_option("--sigmas", sigmas, "Noise levels")->delimiter(',');

  auto* ladder = app.add_subcommand("sphere-ladder", "Spheres S^d in R^{d+1} of growing d");
  Canned ladder_opts;
  ladder_opts.methods = {"l2n2:2:1:d=10-40", "mle:10"};
  std::vector<int> ladder_dims{10, 20, 30, 40};
  add_canned(ladder, ladder_opts);
  ladder->add_option("--dims", ladder_dims, "Sphere dimensions")->delimiter(',');

  auto* study = app.add_subcommand("calib-study", "Fitted (alpha, beta) across sample sizes");
  std::vector<Index> study_n{625, 1250, 2500, 5000, 10000};
  std::string study_pair = "2:1", study_range = "1-20", study_output;
  int study_reps = 50;
  std::uint64_t study_seed = 0;
  Index study_cap = 0;
  study->add_option("-n,--n", study_n, "Sample sizes")->delimiter(',');
  study->add_option("--pair", study_pair, "Neighbor pair K:J");
  study->add_option("--range", study_range, "Dimension range LO-HI");
  study->add_option("--repetitions", study_reps, "Clouds per dimension");
  study->add_option("--seed", study_seed, "Master seed");
  study->add_option("--query-cap", study_cap, "Average L over at most this many points (0: all)");
  study->add_option("-o,--output", study_output, "CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*constants) {
      const auto rows = constants_table(k_max);
      if (csv) {
        std::cout << "k,j,C\n";
        for (const auto& r : rows)
          std::printf("%d,%d,%.10f\n", r.pair.k, r.pair.j, r.value);
      } else {
        std::printf("%3s %3s %14s\n", "k", "j", "C_{k,j}");
        for (const auto& r : rows) std::printf("%3d %3d %14.7f\n", r.pair.k, r.pair.j, r.value);
      }
    } else if (*calib) {
      CalibrationSpec base;
      base.d_range = parse_range(cal_range);
      base.repetitions = cal_reps;
      base.seed = cal_seed;
      if (cal_query_cap > 0) base.query_cap = cal_query_cap;
      std::vector<KJPair> pairs;
      for (const auto& p : cal_pairs) pairs.push_back(parse_pair(p));
      std::vector<CalibrationEntry> fresh;
      for (Index n : cal_n) {
        base.n = n;
        for (const auto& run : calibrate_pairs(base, pairs)) {
          const CalibrationEntry& e = run.entry;
          std::printf("%-28s alpha_fit=%.6f (%.6f)  beta_fit=%.6f (%.6f)\n", e.key().c_str(),
                      e.alpha_fit, e.alpha_fit_stderr, e.beta_fit, e.beta_fit_stderr);
          std::fflush(stdout);
          fresh.push_back(e);
        }
      }
      if (!cal_output.empty()) {
        merge_into(cal_output, fresh);
        std::cout << "wrote " << cal_output << '\n';
      }
    } else if (*est) {
      IngestOptions ingest;
      ingest.seed = est_seed;
      if (ingest_subsample > 0) ingest.subsample = ingest_subsample;
      const PointCloud cloud = ingest_matrix(input, ingest);
      EstimateOptions opts;
      opts.keep_point_values = point_values;
      std::vector<Index> query;
      if (subset > 0) {
        if (subset > cloud.rows())
          throw Error(ErrorCode::InvalidArgument, "subset larger than the cloud");
        Rng rng(derive_seed(est_seed, {1}));
        query = sample_indices<Index>(cloud.rows(), subset, rng);
      }

      EstimateReport report;
      if (method_name == "mle") {
        report = estimate_mle(cloud, est->count("-k") ? est_k : 10, query, opts);
      } else {
        const KJPair pair{est_k, est_j};
        validate(pair);
        CalibrationEntry cal;
        if (asymptotic) {
          cal = asymptotic_entry(pair);
        } else {
          const auto table = load_table(table_path.empty() ? default_table_path() : fs::path(table_path));
          const CalibrationKey key{cal_n_key > 0 ? cal_n_key : cloud.rows(), pair, parse_range(est_range)};
          if (cal_n_key > 0) {
            cal = lookup(table, key);
          } else {
            const NearestMatch m = lookup_nearest(table, key);
            cal = *m.entry;
          }
        }
        report = estimate_l2n2(cloud, pair, cal, query, opts);
      }

      std::string text;
      if (json)
        text = report_json(report) + "\n";
      else if (round)
        text = std::to_string(report.d_rounded) + "\n";
      else
        text = report_text(report);
      if (est_output.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(est_output);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + est_output);
        out << text;
      }
      if (round && !json)
        for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    } else if (*gen) {
      if (list) {
        std::printf("%-20s %4s %4s  %s\n", "id", "d", "D", "description");
        for (const auto& m : manifold_catalog())
          std::printf("%-20s %4s %4s  %s%s\n", m.name.c_str(),
                      m.intrinsic_d ? std::to_string(m.intrinsic_d).c_str() : "-",
                      m.ambient_D ? std::to_string(m.ambient_D).c_str() : "-", m.description.c_str(),
                      m.implemented ? "" : " [not implemented]");
        return 0;
      }
      if (gen_name.empty()) throw Error(ErrorCode::InvalidArgument, "generate needs a manifold name or --list");
      if (gen_output.empty()) throw Error(ErrorCode::InvalidArgument, "generate needs --output");
      gen_spec.name = gen_name;
      const PointCloud cloud = generate(gen_spec);
      write_matrix(gen_output, cloud);
      std::cout << "wrote " << cloud.rows() << "x" << cloud.cols() << " to " << gen_output << '\n';
    } else if (*bench) {
      ExperimentPlan plan = load_plan(plan_path);
      if (!bench_output.empty()) plan.output = bench_output;
      if (!bench_calibration.empty()) plan.calibration = bench_calibration;
      finish_report(run_plan(plan), plan.output);
    } else if (*noise || *ladder) {
      const bool is_noise = static_cast<bool>(*noise);
      const Canned& c = is_noise ? noise_opts : ladder_opts;
      ExperimentPlan plan = is_noise ? noise_sweep_plan(noise_dims, noise_ambient, sigmas, c.n,
                                                        c.repetitions, c.seed, parse_methods(c.methods))
                                     : sphere_ladder_plan(ladder_dims, c.n, c.repetitions, c.seed,
                                                          parse_methods(c.methods));
      plan.calibration = c.calibration;
      finish_report(run_plan(plan), c.output);
    } else if (*study) {
      std::optional<Index> cap;
      if (study_cap > 0) cap = study_cap;
      const auto entries =
          calib_study(study_n, parse_pair(study_pair), parse_range(study_range), study_reps, study_seed, cap);
      const std::string text = calib_study_csv(entries);
      std::cout << text;
      if (!study_output.empty()) {
        std::ofstream out(study_output);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + study_output);
        out << text;
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
