#include "l2n2/calibration.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "l2n2/constants.hpp"
#include "l2n2/lstat.hpp"
#include "l2n2/random.hpp"

namespace l2n2 {

void validate(const CalibrationSpec& spec) {
  validate(spec.pair);
  if (spec.d_range.min < 1 || spec.d_range.max < spec.d_range.min)
    throw Error(ErrorCode::InvalidSpec, "dimension range must satisfy 1 <= d_min <= d_max");
  if (spec.d_range.min == spec.d_range.max)
    throw Error(ErrorCode::InvalidSpec,
                "a single dimension cannot determine slope and intercept");
  if (spec.repetitions < 1) throw Error(ErrorCode::InvalidSpec, "repetitions must be >= 1");
  if (spec.n < spec.pair.k + 1)
    throw Error(ErrorCode::InvalidSpec, "n must be at least k + 1");
  if (spec.query_cap && *spec.query_cap < 1)
    throw Error(ErrorCode::InvalidSpec, "query cap must be positive");
}

std::string CalibrationEntry::key() const {
  return "n=" + std::to_string(spec.n) + ",k=" + std::to_string(spec.pair.k) +
         ",j=" + std::to_string(spec.pair.j) + ",d=" + std::to_string(spec.d_range.min) + "-" +
         std::to_string(spec.d_range.max);
}

CalibrationEntry make_entry(const CalibrationSpec& spec, double alpha_fit, double beta_fit,
                            double alpha_stderr, double beta_stderr) {
  CalibrationEntry e;
  e.spec = spec;
  e.alpha_fit = alpha_fit;
  e.beta_fit = beta_fit;
  e.alpha_fit_stderr = alpha_stderr;
  e.beta_fit_stderr = beta_stderr;
  e.est_alpha = 1.0 / alpha_fit;
  e.est_beta = -beta_fit / alpha_fit;
  return e;
}

CalibrationEntry asymptotic_entry(const KJPair& pair) {
  CalibrationSpec spec;
  spec.n = 0;
  spec.pair = pair;
  spec.repetitions = 0;
  return make_entry(spec, 1.0, c_kj_exact(pair), 0.0, 0.0);
}

PointCloud sample_gaussian_cloud(int d, Index n, std::uint64_t seed) {
  if (d < 1 || n < 2) throw Error(ErrorCode::InvalidArgument, "Gaussian cloud needs d >= 1, n >= 2");
  Rng rng(seed);
  std::normal_distribution<double> normal;
  PointCloud cloud(n, d);
  for (Index i = 0; i < cloud.size(); ++i) cloud.data()[i] = normal(rng);
  return cloud;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3)
    throw Error(ErrorCode::InvalidArgument, "line fit needs at least 3 paired samples");
  const auto n = static_cast<Index>(x.size());
  Eigen::MatrixX2d design(n, 2);
  design.col(0) = Eigen::Map<const Eigen::VectorXd>(x.data(), n);
  design.col(1).setOnes();
  const Eigen::Map<const Eigen::VectorXd> rhs(y.data(), n);

  const Eigen::Matrix2d gram = design.transpose() * design;
  if (std::abs(gram.determinant()) <= 1e-12 * gram.squaredNorm())
    throw Error(ErrorCode::InvalidSpec, "regressor is constant; slope undetermined");
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  const double rss = (rhs - design * coef).squaredNorm();
  const double sigma2 = rss / static_cast<double>(n - 2);
  const Eigen::Matrix2d cov = sigma2 * gram.inverse();

  return {coef(0), coef(1), std::sqrt(cov(0, 0)), std::sqrt(cov(1, 1)), std::sqrt(sigma2)};
}

QuadraticTerm quadratic_term(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 4)
    throw Error(ErrorCode::InvalidArgument, "quadratic fit needs at least 4 paired samples");
  const auto n = static_cast<Index>(x.size());
  Eigen::MatrixX3d design(n, 3);
  for (Index i = 0; i < n; ++i) design.row(i) << 1.0, x[i], x[i] * x[i];
  const Eigen::Map<const Eigen::VectorXd> rhs(y.data(), n);
  const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(rhs);
  const double sigma2 = (rhs - design * coef).squaredNorm() / static_cast<double>(n - 3);
  const Eigen::Matrix3d cov = sigma2 * (design.transpose() * design).inverse();
  return {coef(2), std::sqrt(cov(2, 2))};
}

namespace {

// Mean L of every pair for one Gaussian cloud; a single neighbor table serves all pairs.
std::vector<double> cloud_means(const CalibrationSpec& spec, std::span<const KJPair> pairs, int d,
                                int rep) {
  int kmax = 0;
  for (const auto& p : pairs) kmax = std::max(kmax, p.k);
  const auto n = static_cast<std::uint64_t>(spec.n);
  const PointCloud cloud =
      sample_gaussian_cloud(d, spec.n, derive_seed(spec.seed, {n, std::uint64_t(d), std::uint64_t(rep)}));

  NeighborTable table;
  if (spec.query_cap && *spec.query_cap < spec.n) {
    Rng rng(derive_seed(spec.seed, {n, std::uint64_t(d), std::uint64_t(rep), 1}));
    const auto query = sample_indices<Index>(spec.n, *spec.query_cap, rng);
    table = build_neighbor_table(cloud, kmax, std::span<const Index>(query));
  } else {
    table = build_neighbor_table(cloud, kmax);
  }

  std::vector<double> means;
  means.reserve(pairs.size());
  for (const auto& p : pairs) means.push_back(l_stat_mean(table, LStatConfig{p.k, p.j, {}}).mean);
  return means;
}

}  // namespace

std::vector<CalibrationRun> calibrate_pairs(const CalibrationSpec& spec,
                                            std::span<const KJPair> pairs) {
  if (pairs.empty()) throw Error(ErrorCode::InvalidSpec, "no neighbor pairs requested");
  for (const auto& p : pairs) {
    CalibrationSpec single = spec;
    single.pair = p;
    validate(single);
  }

  const int dims = spec.d_range.max - spec.d_range.min + 1;
  const std::size_t cells = static_cast<std::size_t>(dims) * static_cast<std::size_t>(spec.repetitions);
  // cell_means[cell][pair], cells ordered by (d, repetition).
  std::vector<std::vector<double>> cell_means(cells);
#pragma omp parallel for schedule(dynamic, 1)
  for (long c = 0; c < static_cast<long>(cells); ++c) {
    const int d = spec.d_range.min + static_cast<int>(c / spec.repetitions);
    const int rep = static_cast<int>(c % spec.repetitions);
    cell_means[static_cast<std::size_t>(c)] = cloud_means(spec, pairs, d, rep);
  }

  std::vector<CalibrationRun> runs;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    CalibrationRun run;
    std::vector<double> x, y;
    x.reserve(cells);
    y.reserve(cells);
    for (std::size_t c = 0; c < cells; ++c) {
      const int d = spec.d_range.min + static_cast<int>(c / static_cast<std::size_t>(spec.repetitions));
      const int rep = static_cast<int>(c % static_cast<std::size_t>(spec.repetitions));
      const double mean_l = cell_means[c][p];
      run.samples.push_back({d, rep, mean_l});
      x.push_back(std::log(static_cast<double>(d)));
      y.push_back(mean_l);
    }
    CalibrationSpec single = spec;
    single.pair = pairs[p];
    if (cells < 3) throw Error(ErrorCode::InvalidSpec, "too few calibration clouds for a fit");
    const LinearFit fit = fit_line(x, y);
    run.entry = make_entry(single, fit.slope, fit.intercept, fit.slope_stderr, fit.intercept_stderr);
    runs.push_back(std::move(run));
  }
  return runs;
}

CalibrationRun calibrate_run(const CalibrationSpec& spec) {
  const KJPair pair = spec.pair;
  auto runs = calibrate_pairs(spec, std::span<const KJPair>(&pair, 1));
  return std::move(runs.front());
}

CalibrationEntry calibrate(const CalibrationSpec& spec) { return calibrate_run(spec).entry; }

// ---------------------------------------------------------------------------
// Table I/O

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_field(const std::string& text, const std::filesystem::path& path, std::size_t line_no) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error(ErrorCode::FormatError, path.string() + ":" + std::to_string(line_no) +
                                            ": bad field '" + text + "'");
  return value;
}

constexpr std::size_t kRecordFields = 14;

}  // namespace

void save_table(std::span<const CalibrationEntry> entries, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << kTableHeader << '\n';
  out << "# n k j d_min d_max repetitions seed query_cap alpha_fit alpha_fit_stderr beta_fit "
         "beta_fit_stderr est_alpha est_beta\n";
  for (const auto& e : entries) {
    const auto& s = e.spec;
    out << s.n << ' ' << s.pair.k << ' ' << s.pair.j << ' ' << s.d_range.min << ' '
        << s.d_range.max << ' ' << s.repetitions << ' ' << s.seed << ' ' << s.query_cap.value_or(0)
        << ' ' << format_double(e.alpha_fit) << ' ' << format_double(e.alpha_fit_stderr) << ' '
        << format_double(e.beta_fit) << ' ' << format_double(e.beta_fit_stderr) << ' '
        << format_double(e.est_alpha) << ' ' << format_double(e.est_beta) << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::vector<CalibrationEntry> load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open calibration table " + path.string());
  std::vector<CalibrationEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    if (!seen_header) {
      if (line != kTableHeader)
        throw Error(ErrorCode::FormatError, path.string() + ": expected '" + kTableHeader +
                                                "', found '" + line + "'");
      seen_header = true;
      continue;
    }
    std::istringstream fields(line);
    std::vector<std::string> f;
    for (std::string tok; fields >> tok;) f.push_back(tok);
    if (f.size() != kRecordFields)
      throw Error(ErrorCode::FormatError, path.string() + ":" + std::to_string(line_no) +
                                              ": expected " + std::to_string(kRecordFields) +
                                              " fields, found " + std::to_string(f.size()));
    CalibrationEntry e;
    e.spec.n = parse_field<Index>(f[0], path, line_no);
    e.spec.pair = {parse_field<int>(f[1], path, line_no), parse_field<int>(f[2], path, line_no)};
    e.spec.d_range = {parse_field<int>(f[3], path, line_no), parse_field<int>(f[4], path, line_no)};
    e.spec.repetitions = parse_field<int>(f[5], path, line_no);
    e.spec.seed = parse_field<std::uint64_t>(f[6], path, line_no);
    if (const auto cap = parse_field<Index>(f[7], path, line_no); cap > 0) e.spec.query_cap = cap;
    e.alpha_fit = parse_field<double>(f[8], path, line_no);
    e.alpha_fit_stderr = parse_field<double>(f[9], path, line_no);
    e.beta_fit = parse_field<double>(f[10], path, line_no);
    e.beta_fit_stderr = parse_field<double>(f[11], path, line_no);
    e.est_alpha = parse_field<double>(f[12], path, line_no);
    e.est_beta = parse_field<double>(f[13], path, line_no);
    entries.push_back(e);
  }
  if (!seen_header)
    throw Error(ErrorCode::FormatError, path.string() + ": missing '" + kTableHeader + "' line");
  return entries;
}

namespace {

std::string describe(const CalibrationKey& key) {
  return "n=" + std::to_string(key.n) + ", (k,j)=(" + std::to_string(key.pair.k) + "," +
         std::to_string(key.pair.j) + "), d in [" + std::to_string(key.d_range.min) + "," +
         std::to_string(key.d_range.max) + "]";
}

}  // namespace

NearestMatch lookup_nearest(std::span<const CalibrationEntry> entries, const CalibrationKey& key) {
  NearestMatch best;
  Index best_gap = 0;
  for (const auto& e : entries) {
    if (!(e.spec.pair == key.pair) || !(e.spec.d_range == key.d_range)) continue;
    const Index gap = e.spec.n > key.n ? e.spec.n - key.n : key.n - e.spec.n;
    if (!best.entry || gap < best_gap || (gap == best_gap && e.spec.n < best.entry->spec.n)) {
      best.entry = &e;
      best_gap = gap;
    }
  }
  if (!best.entry)
    throw Error(ErrorCode::NoCalibration, "no calibration entry for " + describe(key));
  best.exact = best_gap == 0;
  return best;
}

const CalibrationEntry& lookup(std::span<const CalibrationEntry> entries, const CalibrationKey& key) {
  NearestMatch match;
  try {
    match = lookup_nearest(entries, key);
  } catch (const Error&) {
    throw Error(ErrorCode::NoCalibration,
                "no calibration entry for " + describe(key) + " and no other n for that pair/range");
  }
  if (!match.exact)
    throw Error(ErrorCode::NoCalibration, "no calibration entry for " + describe(key) +
                                              "; nearest available n=" +
                                              std::to_string(match.entry->spec.n));
  return *match.entry;
}

std::filesystem::path default_table_path() {
  if (const char* env = std::getenv("L2N2_CALIBRATION")) return env;
  return L2N2_DEFAULT_CALIBRATION;
}

}  // namespace l2n2
