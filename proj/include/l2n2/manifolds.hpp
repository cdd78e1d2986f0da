#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "l2n2/types.hpp"

namespace l2n2 {

struct ManifoldInfo {
  std::string name;
  int intrinsic_d = 0;  // 0 for the parametric builtins (sphere, gaussian, cube)
  int ambient_D = 0;
  bool implemented = false;
  std::string description;
};

/// The benchmark manifolds (ids M1_Sphere ... Mp3_Paraboloid) followed by the
/// parametric builtins. Benchmark ids whose constructions are not transcribed
/// are listed with implemented = false.
const std::vector<ManifoldInfo>& manifold_catalog();

/// Catalog row for a name; NotImplemented error listing the known ids otherwise.
const ManifoldInfo& manifold_info(const std::string& name);

struct ManifoldSpec {
  std::string name;
  int intrinsic_d = 0;  // 0: take from the catalog
  int ambient_D = 0;    // 0: take from the catalog (builtins: intrinsic_d + 1 for sphere, else intrinsic_d)
  Index n = 2500;
  double noise_sigma = 0;
  std::uint64_t seed = 0;
};

/// Fills catalog dimensions and checks consistency; returns the completed spec.
ManifoldSpec resolve(const ManifoldSpec& spec);

/// n points on the named manifold, then i.i.d. N(0, sigma^2) noise on every
/// ambient coordinate when noise_sigma > 0.
PointCloud generate(const ManifoldSpec& spec);

/// Uniform on the unit d-sphere in R^{d+1}, zero-padded to ambient_D columns.
PointCloud sphere_uniform(int d, Index n, int ambient_D, std::uint64_t seed);

/// Uniform on [0,1]^d, zero-padded to ambient_D columns.
PointCloud cube_uniform(int d, Index n, int ambient_D, std::uint64_t seed);

/// Adds i.i.d. N(0, sigma^2) to every entry. sigma = 0 returns the input unchanged.
PointCloud add_noise(const PointCloud& cloud, double sigma, std::uint64_t seed);

}  // namespace l2n2
