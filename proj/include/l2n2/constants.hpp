#pragma once

#include <cstdint>
#include <vector>

#include "l2n2/types.hpp"

namespace l2n2 {

/// The universal constant C_{k,j} = -E[log log(1/U)], U ~ Beta(j, k - j):
/// the limit of mean L_{k,j} is log(d) + C_{k,j} for any density on any
/// d-dimensional C^1 manifold. C_{j+1,j} = gamma + log j.
///
/// Evaluated from the alternating series
///   K * sum_{i=0}^{k-j-1} (-1)^i binom(k-j-1, i) (gamma + log(i+j)) / (i+j),
/// K = (k-1)! / ((j-1)! (k-j-1)!), in extended precision; falls back to
/// quadrature when k - j > 12 or the series loses more than 1e-10 relative
/// accuracy to cancellation.
double c_kj_exact(const KJPair& pair);

/// Series form only. `relative_error` bounds the cancellation loss.
struct SeriesValue {
  double value = 0;
  double relative_error = 0;
};
SeriesValue c_kj_series(const KJPair& pair);

/// Trapezoid quadrature of -K * int_0^inf log(s) e^{-js} (1 - e^{-s})^{k-j-1} ds
/// after substituting s = e^t, where the integrand decays exponentially at
/// both ends.
double c_kj_quadrature(const KJPair& pair);

struct MonteCarloEstimate {
  double mean = 0;
  double std_error = 0;
  std::int64_t samples = 0;
};

/// Monte-Carlo mean of -log log(1/U), U ~ Beta(j, k - j). samples >= 1e4.
MonteCarloEstimate c_kj_beta_oracle(const KJPair& pair, std::int64_t samples, std::uint64_t seed);

/// Mean of L_{k,j}(0, H) for a rate-`rate` homogeneous Poisson process H in
/// R^d, simulated through its arrival times: R_m = (Y_m / (rate * w_d))^{1/d}
/// with Y_m a sum of m unit exponentials and w_d the unit-ball volume.
/// Converges to log(d) + C_{k,j}. trials >= 1e4.
MonteCarloEstimate poisson_limit_oracle(int d, double rate, const KJPair& pair,
                                        std::int64_t trials, std::uint64_t seed);

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

struct ConstantRow {
  KJPair pair;
  double value = 0;
};

/// C_{k,j} for every 2 <= k <= k_max, 1 <= j < k, ordered by (k, j).
std::vector<ConstantRow> constants_table(int k_max);

}  // namespace l2n2
