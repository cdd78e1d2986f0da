#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <numeric>
#include "l2n2/errors.hpp"
#include <string_view>
#include <vector>

namespace l2n2 {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a, used to fold identifiers such as manifold names into seeds.
inline std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Sub-seed for one cell of an experiment: the master seed chained through
/// splitmix64 with each key component in order.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t s = splitmix64(master);
  for (std::uint64_t key : keys) s = splitmix64(s ^ splitmix64(key));
  return s;
}

/// m distinct indices from [0, n), uniformly at random, returned sorted.
template <typename IndexT>
std::vector<IndexT> sample_indices(IndexT n, IndexT m, Rng& rng) {
  if (m < 0 || m > n) throw Error(ErrorCode::InvalidArgument, "sample size exceeds population");
  std::vector<IndexT> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), IndexT{0});
  for (IndexT i = 0; i < m; ++i) {
    std::uniform_int_distribution<IndexT> pick(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(m));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace l2n2
