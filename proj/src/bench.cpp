#include "l2n2/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "l2n2/random.hpp"

namespace l2n2 {

double mpe(double d_hat, int d_true) {
  if (d_true < 1) throw Error(ErrorCode::InvalidArgument, "true dimension must be positive");
  return 100.0 * std::abs(d_hat - d_true) / d_true;
}

std::string MethodConfig::id() const {
  std::string s;
  if (method == Method::MLE) return "mle(" + std::to_string(pair.k) + ")";
  s = "l2n2(" + std::to_string(pair.k) + "," + std::to_string(pair.j) + ")";
  if (asymptotic)
    s += "asym";
  else if (!(d_range == DimRange{}))
    s += "[d" + std::to_string(d_range.min) + "-" + std::to_string(d_range.max) + "]";
  if (subset) s += "sub" + std::to_string(*subset);
  if (round) s += "r";
  return s;
}

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t end = text.find(sep, pos);
    std::string part(text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
    const auto b = part.find_first_not_of(" \t");
    const auto e = part.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : part.substr(b, e - b + 1));
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return out;
}

int to_int(const std::string& s, std::string_view context) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidSpec, "expected an integer in '" + std::string(context) + "'");
}

}  // namespace

MethodConfig parse_method(std::string_view text) {
  const auto parts = split(text, ':');
  MethodConfig m;
  if (parts.empty()) throw Error(ErrorCode::InvalidSpec, "empty method");
  if (parts[0] == "mle") {
    if (parts.size() != 2) throw Error(ErrorCode::InvalidSpec, "MLE method is 'mle:K', got '" + std::string(text) + "'");
    m.method = Method::MLE;
    m.pair = {to_int(parts[1], text), 1};
    if (m.pair.k < 2) throw Error(ErrorCode::InvalidSpec, "MLE needs k >= 2");
    return m;
  }
  if (parts[0] != "l2n2" || parts.size() < 3)
    throw Error(ErrorCode::InvalidSpec, "method must be 'l2n2:K:J[:opts]' or 'mle:K', got '" +
                                            std::string(text) + "'");
  m.pair = {to_int(parts[1], text), to_int(parts[2], text)};
  validate(m.pair);
  for (std::size_t i = 3; i < parts.size(); ++i) {
    const std::string& opt = parts[i];
    if (opt == "r") {
      m.round = true;
    } else if (opt == "asym") {
      m.asymptotic = true;
    } else if (opt.starts_with("sub=")) {
      m.subset = to_int(opt.substr(4), text);
    } else if (opt.starts_with("d=")) {
      const auto range = split(opt.substr(2), '-');
      if (range.size() != 2) throw Error(ErrorCode::InvalidSpec, "range option is d=LO-HI");
      m.d_range = {to_int(range[0], text), to_int(range[1], text)};
    } else {
      throw Error(ErrorCode::InvalidSpec, "unknown method option '" + opt + "'");
    }
  }
  return m;
}

std::string label(const ManifoldSpec& spec) {
  const ManifoldInfo& info = manifold_info(spec.name);
  std::ostringstream out;
  out << spec.name;
  if (info.intrinsic_d == 0) out << "(d=" << spec.intrinsic_d << ",D=" << spec.ambient_D << ")";
  if (spec.noise_sigma > 0) out << "[sigma=" << spec.noise_sigma << "]";
  return out.str();
}

void validate(const ExperimentPlan& plan) {
  if (plan.suite.empty()) throw Error(ErrorCode::InvalidSpec, "plan has no manifolds");
  if (plan.methods.empty()) throw Error(ErrorCode::InvalidSpec, "plan has no methods");
  if (plan.n_list.empty()) throw Error(ErrorCode::InvalidSpec, "plan has no sample sizes");
  if (plan.repetitions < 1) throw Error(ErrorCode::InvalidSpec, "repetitions must be >= 1");
  for (Index n : plan.n_list)
    if (n < 2) throw Error(ErrorCode::InvalidSpec, "sample sizes must be >= 2");
  std::set<std::string> ids;
  for (const auto& m : plan.methods)
    if (!ids.insert(m.id()).second)
      throw Error(ErrorCode::InvalidSpec, "method " + m.id() + " listed twice");
}

namespace {

struct Job {
  std::size_t manifold;
  Index n;
  int repetition;
};

struct ResolvedManifold {
  ManifoldSpec spec;  // resolved, or the raw spec when resolution failed
  std::string label;
  std::string error;
};

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  mean = sd = 0;
  if (v.empty()) return;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return;
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Calibration lookup shared by run_plan and the optimizer.
struct CalibrationChoice {
  CalibrationEntry entry;
  std::string warning;
};

CalibrationChoice choose_calibration(const MethodConfig& m, Index n,
                                     std::span<const CalibrationEntry> table) {
  if (m.asymptotic) return {asymptotic_entry(m.pair), {}};
  const NearestMatch match = lookup_nearest(table, {n, m.pair, m.d_range});
  CalibrationChoice choice{*match.entry, {}};
  if (!match.exact)
    choice.warning = "no calibration at n=" + std::to_string(n) + "; using " + match.entry->key();
  return choice;
}

}  // namespace

BenchReport run_plan(const ExperimentPlan& plan) {
  validate(plan);
  bool needs_table = false;
  for (const auto& m : plan.methods) needs_table |= m.method == Method::L2N2 && !m.asymptotic;
  std::vector<CalibrationEntry> table;
  if (needs_table)
    table = load_table(plan.calibration.empty() ? default_table_path() : plan.calibration);
  return run_plan(plan, table);
}

BenchReport run_plan(const ExperimentPlan& plan, std::span<const CalibrationEntry> table) {
  validate(plan);
  if (!plan.output.empty()) {
    std::ofstream probe(plan.output, std::ios::app);
    if (!probe) throw Error(ErrorCode::Io, "cannot write report to " + plan.output.string());
  }

  std::vector<ResolvedManifold> manifolds;
  for (const auto& raw : plan.suite) {
    ResolvedManifold r;
    try {
      r.spec = resolve(raw);
      r.label = label(r.spec);
    } catch (const Error& e) {
      r.spec = raw;
      r.label = raw.name;
      r.error = e.what();
    }
    manifolds.push_back(std::move(r));
  }

  std::vector<Job> jobs;
  for (std::size_t mi = 0; mi < manifolds.size(); ++mi)
    for (Index n : plan.n_list)
      for (int rep = 0; rep < plan.repetitions; ++rep) jobs.push_back({mi, n, rep});

  const std::size_t methods = plan.methods.size();
  std::vector<CellResult> cells(jobs.size() * methods);
  std::vector<std::string> cell_warnings(cells.size());

#pragma omp parallel for schedule(dynamic, 1)
  for (long jj = 0; jj < static_cast<long>(jobs.size()); ++jj) {
    const Job& job = jobs[static_cast<std::size_t>(jj)];
    const ResolvedManifold& man = manifolds[job.manifold];
    const std::uint64_t name_hash = hash_name(man.label);

    PointCloud cloud;
    std::string cloud_error = man.error;
    if (cloud_error.empty()) {
      try {
        ManifoldSpec spec = man.spec;
        spec.n = job.n;
        spec.seed = derive_seed(plan.seed, {name_hash, std::uint64_t(job.n), std::uint64_t(job.repetition)});
        cloud = generate(spec);
      } catch (const Error& e) {
        cloud_error = e.what();
      }
    }

    for (std::size_t mm = 0; mm < methods; ++mm) {
      const MethodConfig& method = plan.methods[mm];
      const std::size_t slot = static_cast<std::size_t>(jj) * methods + mm;
      CellResult& cell = cells[slot];
      cell.manifold = man.label;
      cell.method = method.id();
      cell.n = job.n;
      cell.repetition = job.repetition;
      cell.d_true = man.spec.intrinsic_d;
      if (!cloud_error.empty()) {
        cell.error = cloud_error;
        continue;
      }
      try {
        const auto start = std::chrono::steady_clock::now();
        EstimateReport est;
        if (method.method == Method::MLE) {
          est = estimate_mle(cloud, method.pair.k);
        } else {
          const CalibrationChoice cal = choose_calibration(method, job.n, table);
          cell_warnings[slot] = cal.warning;
          if (method.subset) {
            const std::uint64_t s = derive_seed(
                plan.seed, {name_hash, hash_name(cell.method), std::uint64_t(job.n), std::uint64_t(job.repetition)});
            est = estimate_subsampled(cloud, method.pair, cal.entry, std::min(*method.subset, job.n), s);
          } else {
            est = estimate_l2n2(cloud, method.pair, cal.entry);
          }
        }
        const auto stop = std::chrono::steady_clock::now();
        cell.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
        cell.mean_l = est.mean_l;
        cell.d_hat = method.round ? round_dimension(est.d_hat) : est.d_hat;
      } catch (const Error& e) {
        cell.error = e.what();
      }
    }
  }

  BenchReport report;
  report.seed = plan.seed;
  report.repetitions = plan.repetitions;

  // Group by (manifold, method, n) in sorted key order.
  using Key = std::tuple<std::string, std::string, Index>;
  std::map<Key, std::vector<std::size_t>> groups;
  for (std::size_t c = 0; c < cells.size(); ++c)
    groups[{cells[c].manifold, cells[c].method, cells[c].n}].push_back(c);

  for (const auto& [key, members] : groups) {
    SummaryRow row;
    std::tie(row.manifold, row.method, row.n) = key;
    std::vector<double> errs, hats, times;
    std::set<std::string> errors, warnings;
    int correct = 0;
    for (std::size_t c : members) {
      const CellResult& cell = cells[c];
      row.d_true = cell.d_true;
      if (!cell_warnings[c].empty()) warnings.insert(cell_warnings[c]);
      if (!cell.error.empty()) {
        ++row.failures;
        errors.insert(cell.error);
        continue;
      }
      ++row.runs;
      errs.push_back(mpe(cell.d_hat, cell.d_true));
      hats.push_back(cell.d_hat);
      times.push_back(cell.runtime_ms);
      correct += round_dimension(cell.d_hat) == cell.d_true;
    }
    mean_std(errs, row.mean_mpe, row.std_mpe);
    mean_std(hats, row.mean_d_hat, row.std_d_hat);
    row.rounded_accuracy = row.runs ? static_cast<double>(correct) / row.runs : 0.0;
    row.median_runtime_ms = median(times);
    row.errors.assign(errors.begin(), errors.end());
    row.warnings.assign(warnings.begin(), warnings.end());
    report.rows.push_back(std::move(row));
  }

  std::map<std::pair<std::string, Index>, std::vector<double>> suite;
  for (const auto& row : report.rows)
    if (row.runs > 0) suite[{row.method, row.n}].push_back(row.mean_mpe);
  for (const auto& [key, values] : suite) {
    SuiteRow s{key.first, key.second, static_cast<int>(values.size()), 0.0};
    for (double v : values) s.mean_mpe += v;
    s.mean_mpe /= static_cast<double>(values.size());
    report.suite.push_back(s);
  }

  std::sort(cells.begin(), cells.end(), [](const CellResult& a, const CellResult& b) {
    return std::tie(a.manifold, a.method, a.n, a.repetition) <
           std::tie(b.manifold, b.method, b.n, b.repetition);
  });
  report.cells = std::move(cells);

  if (plan.optimize) {
    for (const auto& method : plan.methods) {
      if (method.method != Method::L2N2) continue;
      for (Index n : plan.n_list) {
        std::vector<CellResult> subset;
        for (const auto& c : report.cells)
          if (c.method == method.id() && c.n == n && c.error.empty()) subset.push_back(c);
        if (subset.empty()) continue;
        CalibrationEntry start;
        try {
          start = choose_calibration(method, n, table).entry;
        } catch (const Error&) {
          continue;
        }
        OptimizedRow opt = optimize_coefficients(subset, start.est_alpha, start.est_beta);
        opt.method = method.id();
        opt.n = n;
        report.optimized.push_back(opt);
      }
    }
  }

  if (!plan.output.empty()) write_report(report, plan.output);
  return report;
}

OptimizedRow optimize_coefficients(std::span<const CellResult> cells, double alpha0, double beta0) {
  std::map<std::string, std::vector<const CellResult*>> by_manifold;
  for (const auto& c : cells)
    if (c.error.empty()) by_manifold[c.manifold].push_back(&c);
  if (by_manifold.empty()) throw Error(ErrorCode::InvalidArgument, "no successful cells to optimize over");

  auto objective = [&](double a, double b) {
    double total = 0;
    for (const auto& [name, group] : by_manifold) {
      double sum = 0;
      for (const CellResult* c : group) sum += mpe(std::exp(a * c->mean_l + b), c->d_true);
      total += sum / static_cast<double>(group.size());
    }
    return total / static_cast<double>(by_manifold.size());
  };

  double best_a = alpha0, best_b = beta0, best = objective(alpha0, beta0);
  double span_a = 0.5 * std::max(std::abs(alpha0), 0.1), span_b = 0.5 * std::max(std::abs(beta0), 0.5);
  constexpr int kGrid = 20;
  for (int level = 0; level < 6; ++level) {
    const double ca = best_a, cb = best_b;
    for (int ia = -kGrid; ia <= kGrid; ++ia)
      for (int ib = -kGrid; ib <= kGrid; ++ib) {
        const double a = ca + span_a * ia / kGrid;
        const double b = cb + span_b * ib / kGrid;
        const double v = objective(a, b);
        if (v < best) {
          best = v;
          best_a = a;
          best_b = b;
        }
      }
    span_a *= 0.2;
    span_b *= 0.2;
  }
  return {"", 0, best_a, best_b, best};
}

std::string to_json(const BenchReport& report, bool include_timing) {
  using Json = nlohmann::ordered_json;
  Json j;
  j["seed"] = report.seed;
  j["repetitions"] = report.repetitions;
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    Json o;
    o["manifold"] = r.manifold;
    o["method"] = r.method;
    o["n"] = r.n;
    o["d_true"] = r.d_true;
    o["runs"] = r.runs;
    o["failures"] = r.failures;
    o["mean_mpe"] = r.mean_mpe;
    o["std_mpe"] = r.std_mpe;
    o["mean_d_hat"] = r.mean_d_hat;
    o["std_d_hat"] = r.std_d_hat;
    o["rounded_accuracy"] = r.rounded_accuracy;
    if (!r.errors.empty()) o["errors"] = r.errors;
    if (!r.warnings.empty()) o["warnings"] = r.warnings;
    rows.push_back(std::move(o));
  }
  j["summary"] = std::move(rows);
  Json suite = Json::array();
  for (const auto& s : report.suite)
    suite.push_back({{"method", s.method}, {"n", s.n}, {"manifolds", s.manifolds}, {"mean_mpe", s.mean_mpe}});
  j["suite"] = std::move(suite);
  if (!report.optimized.empty()) {
    Json opt = Json::array();
    for (const auto& o : report.optimized)
      opt.push_back({{"method", o.method}, {"n", o.n}, {"est_alpha", o.est_alpha},
                     {"est_beta", o.est_beta}, {"suite_mpe", o.suite_mpe}});
    j["optimized"] = std::move(opt);
  }
  Json cells = Json::array();
  for (const auto& c : report.cells) {
    Json o{{"manifold", c.manifold}, {"method", c.method}, {"n", c.n}, {"repetition", c.repetition}};
    if (c.error.empty()) {
      o["d_hat"] = c.d_hat;
      o["mean_l"] = c.mean_l;
    } else {
      o["error"] = c.error;
    }
    cells.push_back(std::move(o));
  }
  j["cells"] = std::move(cells);
  if (include_timing) {
    Json timing = Json::array();
    for (const auto& r : report.rows)
      timing.push_back({{"manifold", r.manifold}, {"method", r.method}, {"n", r.n},
                        {"median_runtime_ms", r.median_runtime_ms}});
    j["timing"] = std::move(timing);
  }
  return j.dump(2);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

std::string to_csv(const BenchReport& report) {
  std::ostringstream out;
  out.precision(10);
  out << "manifold,method,n,d_true,runs,failures,mean_mpe,std_mpe,mean_d_hat,std_d_hat,rounded_accuracy,median_runtime_ms\n";
  for (const auto& r : report.rows)
    out << csv_field(r.manifold) << ',' << csv_field(r.method) << ',' << r.n << ',' << r.d_true
        << ',' << r.runs << ',' << r.failures << ',' << r.mean_mpe << ',' << r.std_mpe << ','
        << r.mean_d_hat << ',' << r.std_d_hat << ',' << r.rounded_accuracy << ','
        << r.median_runtime_ms << '\n';
  return out.str();
}

void write_report(const BenchReport& report, const std::filesystem::path& path) {
  {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << to_json(report) << '\n';
  }
  std::filesystem::path csv = path;
  csv.replace_extension(".csv");
  std::ofstream out(csv);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + csv.string());
  out << to_csv(report);
}

ExperimentPlan noise_sweep_plan(std::span<const int> dims, int ambient, std::span<const double> sigmas,
                                Index n, int repetitions, std::uint64_t seed,
                                std::vector<MethodConfig> methods) {
  ExperimentPlan plan;
  for (int d : dims)
    for (double s : sigmas) plan.suite.push_back({"sphere", d, ambient, n, s, 0});
  plan.methods = std::move(methods);
  plan.repetitions = repetitions;
  plan.n_list = {n};
  plan.seed = seed;
  return plan;
}

ExperimentPlan sphere_ladder_plan(std::span<const int> dims, Index n, int repetitions,
                                  std::uint64_t seed, std::vector<MethodConfig> methods) {
  ExperimentPlan plan;
  for (int d : dims) plan.suite.push_back({"sphere", d, d + 1, n, 0.0, 0});
  plan.methods = std::move(methods);
  plan.repetitions = repetitions;
  plan.n_list = {n};
  plan.seed = seed;
  return plan;
}

std::vector<CalibrationEntry> calib_study(std::span<const Index> n_list, const KJPair& pair,
                                          DimRange range, int repetitions, std::uint64_t seed,
                                          std::optional<Index> query_cap) {
  std::vector<CalibrationEntry> out;
  for (Index n : n_list) {
    CalibrationSpec spec;
    spec.n = n;
    spec.pair = pair;
    spec.d_range = range;
    spec.repetitions = repetitions;
    spec.seed = seed;
    spec.query_cap = query_cap;
    out.push_back(calibrate(spec));
  }
  return out;
}

std::string calib_study_csv(std::span<const CalibrationEntry> entries) {
  std::ostringstream out;
  out.precision(10);
  out << "n,k,j,d_min,d_max,repetitions,alpha_fit,alpha_fit_stderr,beta_fit,beta_fit_stderr\n";
  for (const auto& e : entries)
    out << e.spec.n << ',' << e.spec.pair.k << ',' << e.spec.pair.j << ',' << e.spec.d_range.min
        << ',' << e.spec.d_range.max << ',' << e.spec.repetitions << ',' << e.alpha_fit << ','
        << e.alpha_fit_stderr << ',' << e.beta_fit << ',' << e.beta_fit_stderr << '\n';
  return out.str();
}

}  // namespace l2n2
