#include "l2n2/constants.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "l2n2/random.hpp"

namespace l2n2 {

namespace {

constexpr int kSeriesMaxGap = 12;
constexpr double kSeriesMaxRelError = 1e-10;

// log((k-1)! / ((j-1)! (k-j-1)!)), the Beta(j, k-j) normalization.
double log_beta_norm(const KJPair& pair) {
  return std::lgamma(static_cast<double>(pair.k)) - std::lgamma(static_cast<double>(pair.j)) -
         std::lgamma(static_cast<double>(pair.k - pair.j));
}

// Welford accumulator.
struct Moments {
  std::int64_t count = 0;
  double mean = 0;
  double m2 = 0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  MonteCarloEstimate estimate() const {
    const double var = count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(count)), count};
  }
};

void require_samples(std::int64_t samples, const char* what) {
  if (samples < 10'000)
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " needs at least 1e4 samples, got " + std::to_string(samples));
}

}  // namespace

SeriesValue c_kj_series(const KJPair& pair) {
  validate(pair);
  using Real = long double;
  const int m = pair.k - pair.j - 1;
  const Real gamma = static_cast<Real>(kEulerGamma);
  Real binom = 1;  // binom(m, i), updated in place
  Real sum = 0;
  Real magnitude = 0;
  for (int i = 0; i <= m; ++i) {
    if (i > 0) binom = binom * static_cast<Real>(m - i + 1) / static_cast<Real>(i);
    const Real denom = static_cast<Real>(i + pair.j);
    const Real term = binom * (gamma + std::log(denom)) / denom;
    sum += (i % 2 == 0) ? term : -term;
    magnitude += std::fabs(term);
  }
  const Real scale = std::exp(static_cast<Real>(log_beta_norm(pair)));
  const Real value = scale * sum;
  const Real eps = std::numeric_limits<Real>::epsilon();
  const Real rel = sum == 0 ? std::numeric_limits<Real>::infinity()
                            : (magnitude / std::fabs(sum)) * eps * static_cast<Real>(m + 2);
  return {static_cast<double>(value), static_cast<double>(rel)};
}

double c_kj_quadrature(const KJPair& pair) {
  validate(pair);
  const int m = pair.k - pair.j - 1;
  const double j = pair.j;
  const double log_norm = log_beta_norm(pair);

  // With s = e^t the integrand is t * exp(log_norm + t - j s + m log(1 - e^{-s})).
  // Near t -> -inf it behaves like t e^{(m+1) t}; past s = 800 / j it is below e^{-800}.
  const double t_hi = std::log(800.0 / j);
  const double t_lo = -(800.0 + std::max(log_norm, 0.0)) / (m + 1) - 5.0;
  const double h = 1.0 / 256.0;
  const auto steps = static_cast<long>(std::ceil((t_hi - t_lo) / h));

  auto integrand = [&](double t) {
    const double s = std::exp(t);
    double log_w = log_norm + t - j * s;
    if (m > 0) log_w += m * std::log(-std::expm1(-s));
    return t * std::exp(log_w);
  };

  double sum = 0.5 * (integrand(t_lo) + integrand(t_lo + steps * h));
  for (long i = 1; i < steps; ++i) sum += integrand(t_lo + i * h);
  return -h * sum;
}

double c_kj_exact(const KJPair& pair) {
  validate(pair);
  if (pair.k - pair.j <= kSeriesMaxGap) {
    const SeriesValue series = c_kj_series(pair);
    if (series.relative_error <= kSeriesMaxRelError) return series.value;
  }
  return c_kj_quadrature(pair);
}

MonteCarloEstimate c_kj_beta_oracle(const KJPair& pair, std::int64_t samples, std::uint64_t seed) {
  validate(pair);
  require_samples(samples, "beta oracle");
  Rng rng(seed);
  std::gamma_distribution<double> first(pair.j, 1.0);
  std::gamma_distribution<double> rest(pair.k - pair.j, 1.0);
  Moments acc;
  for (std::int64_t s = 0; s < samples; ++s) {
    const double x = first(rng);
    const double y = rest(rng);
    // log(1/U) with U = x / (x + y).
    acc.add(-std::log(std::log1p(y / x)));
  }
  return acc.estimate();
}

double unit_ball_volume(int d) {
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
  const double half = 0.5 * d;
  return std::exp(half * std::log(std::numbers::pi) - std::lgamma(half + 1.0));
}

MonteCarloEstimate poisson_limit_oracle(int d, double rate, const KJPair& pair,
                                        std::int64_t trials, std::uint64_t seed) {
  validate(pair);
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
  if (!(rate > 0) || !std::isfinite(rate))
    throw Error(ErrorCode::InvalidArgument, "Poisson rate must be positive and finite");
  require_samples(trials, "Poisson oracle");

  const double volume_rate = rate * unit_ball_volume(d);
  const double inv_d = 1.0 / d;
  Rng rng(seed);
  std::exponential_distribution<double> arrival(1.0);
  Moments acc;
  for (std::int64_t t = 0; t < trials; ++t) {
    double y = 0, rj = 0, rk = 0;
    for (int m = 1; m <= pair.k; ++m) {
      y += arrival(rng);
      if (m == pair.j) rj = std::pow(y / volume_rate, inv_d);
    }
    rk = std::pow(y / volume_rate, inv_d);
    acc.add(-std::log(std::log(rk / rj)));
  }
  return acc.estimate();
}

std::vector<ConstantRow> constants_table(int k_max) {
  if (k_max < 2) throw Error(ErrorCode::InvalidArgument, "k_max must be >= 2");
  std::vector<ConstantRow> rows;
  for (int k = 2; k <= k_max; ++k)
    for (int j = 1; j < k; ++j) rows.push_back({{k, j}, c_kj_exact({k, j})});
  return rows;
}

}  // namespace l2n2
