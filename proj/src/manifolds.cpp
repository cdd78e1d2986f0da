#include "l2n2/manifolds.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "l2n2/random.hpp"

namespace l2n2 {

namespace {

constexpr double kPi = std::numbers::pi;

using Generator = std::function<PointCloud(Index n, Rng& rng)>;

struct Entry {
  ManifoldInfo info;
  Generator make;  // empty when not implemented
};

// Fixed (seed-independent) Gaussian matrix: the embedding of an affine
// benchmark is part of its definition, not of the sample.
Eigen::MatrixXd fixed_matrix(Index rows, Index cols, std::string_view tag) {
  Rng rng(hash_name(tag));
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

PointCloud uniform_box(Index n, int d, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointCloud p(n, d);
  for (Index i = 0; i < p.size(); ++i) p.data()[i] = u(rng);
  return p;
}

PointCloud affine(Index n, int d, int D, std::string_view tag, Rng& rng) {
  const Eigen::MatrixXd map = fixed_matrix(D, d, tag);
  const Eigen::RowVectorXd shift = fixed_matrix(1, D, std::string(tag) + "/shift");
  return (uniform_box(n, d, rng) * map.transpose()).rowwise() + shift;
}

PointCloud cubic(Index n, int d, Rng& rng) {
  PointCloud p = PointCloud::Zero(n, d + 1);
  p.leftCols(d) = uniform_box(n, d, rng);
  return p;
}

PointCloud gaussian(Index n, int d, int D, Rng& rng) {
  std::normal_distribution<double> normal;
  PointCloud p = PointCloud::Zero(n, D);
  for (Index i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) p(i, c) = normal(rng);
  return p;
}

PointCloud sphere(Index n, int d, int D, Rng& rng) {
  std::normal_distribution<double> normal;
  PointCloud p = PointCloud::Zero(n, D);
  for (Index i = 0; i < n; ++i) {
    double norm2 = 0;
    do {
      norm2 = 0;
      for (int c = 0; c <= d; ++c) {
        p(i, c) = normal(rng);
        norm2 += p(i, c) * p(i, c);
      }
    } while (norm2 == 0);
    p.row(i).head(d + 1) /= std::sqrt(norm2);
  }
  return p;
}

// Closed curve winding 8 times around a torus-like tube.
PointCloud helix1d(Index n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointCloud p(n, 3);
  for (Index i = 0; i < n; ++i) {
    const double t = 2 * kPi * u(rng);
    p.row(i) << (2 + std::cos(8 * t)) * std::cos(t), (2 + std::cos(8 * t)) * std::sin(t),
        std::sin(8 * t);
  }
  return p;
}

// Helicoid: radius and angle uniform in [0, 10 pi].
PointCloud helix2d(Index n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 10 * kPi);
  PointCloud p(n, 3);
  for (Index i = 0; i < n; ++i) {
    const double r = u(rng), a = u(rng);
    p.row(i) << r * std::cos(a), r * std::sin(a), 0.5 * a;
  }
  return p;
}

// Swiss roll t in [1.5 pi, 4.5 pi], height in [0, 21]; t drawn with density
// proportional to t so points are uniform in area.
PointCloud swiss_roll(Index n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double t0 = 1.5 * kPi, t1 = 4.5 * kPi;
  PointCloud p(n, 3);
  for (Index i = 0; i < n; ++i) {
    const double t = std::sqrt(t0 * t0 + u(rng) * (t1 * t1 - t0 * t0));
    const double h = 21 * u(rng);
    p.row(i) << t * std::cos(t), h, t * std::sin(t);
  }
  return p;
}

// Moebius-type band with 10 half twists.
PointCloud moebius(Index n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointCloud p(n, 3);
  for (Index i = 0; i < n; ++i) {
    const double phi = 2 * kPi * u(rng);
    const double rad = 2 * u(rng) - 1;
    const double w = 1 + 0.5 * rad * std::cos(5 * phi);
    p.row(i) << w * std::cos(phi), w * std::sin(phi), 0.5 * rad * std::sin(5 * phi);
  }
  return p;
}

PointCloud s_curve(Index n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointCloud p(n, 3);
  for (Index i = 0; i < n; ++i) {
    const double t = 3 * kPi * (u(rng) - 0.5);
    const double h = 2 * u(rng);
    p.row(i) << std::sin(t), h, (t >= 0 ? 1.0 : -1.0) * (std::cos(t) - 1);
  }
  return p;
}

// Two-turn Archimedean spiral r = t, t in [pi, 5 pi], placed in R^13 by a
// fixed isometric embedding.
PointCloud spiral(Index n, Rng& rng) {
  std::uniform_real_distribution<double> u(kPi, 5 * kPi);
  PointCloud plane(n, 2);
  for (Index i = 0; i < n; ++i) {
    const double t = u(rng);
    plane.row(i) << t * std::cos(t), t * std::sin(t);
  }
  const Eigen::MatrixXd frame =
      Eigen::HouseholderQR<Eigen::MatrixXd>(fixed_matrix(13, 2, "M13b_Spiral"))
          .householderQ() *
      Eigen::MatrixXd::Identity(13, 2);
  return plane * frame.transpose();
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    auto add = [&](std::string name, int d, int D, std::string desc, Generator g) {
      const bool impl = static_cast<bool>(g);
      t.push_back({{std::move(name), d, D, impl, std::move(desc)}, std::move(g)});
    };
    const Generator none;
    add("M1_Sphere", 10, 11, "uniform 10-sphere", [](Index n, Rng& r) { return sphere(n, 10, 11, r); });
    add("M2_Affine_3to5", 3, 5, "affine image of the unit 3-cube",
        [](Index n, Rng& r) { return affine(n, 3, 5, "M2_Affine_3to5", r); });
    add("M3_Nonlinear_4to6", 4, 6, "construction not transcribed", none);
    add("M4_Nonlinear", 4, 8, "construction not transcribed", none);
    add("M5a_Helix1d", 1, 3, "closed helix on a tube", helix1d);
    add("M5b_Helix2d", 2, 3, "helicoid", helix2d);
    add("M6_Nonlinear", 6, 36, "construction not transcribed", none);
    add("M7_Roll", 2, 3, "area-uniform swiss roll", swiss_roll);
    add("M8_Nonlinear", 12, 72, "construction not transcribed", none);
    add("M9_Affine", 20, 20, "affine image of the unit 20-cube",
        [](Index n, Rng& r) { return affine(n, 20, 20, "M9_Affine", r); });
    add("M10a_Cubic", 10, 11, "unit 10-cube", [](Index n, Rng& r) { return cubic(n, 10, r); });
    add("M10b_Cubic", 17, 18, "unit 17-cube", [](Index n, Rng& r) { return cubic(n, 17, r); });
    add("M10c_Cubic", 24, 25, "unit 24-cube", [](Index n, Rng& r) { return cubic(n, 24, r); });
    add("M10d_Cubic", 70, 71, "unit 70-cube", [](Index n, Rng& r) { return cubic(n, 70, r); });
    add("M11_Moebius", 2, 3, "band with 10 half twists", moebius);
    add("M12_Norm", 20, 20, "standard Gaussian", [](Index n, Rng& r) { return gaussian(n, 20, 20, r); });
    add("M13a_Scurve", 2, 3, "S-shaped surface", s_curve);
    add("M13b_Spiral", 1, 13, "planar spiral embedded in R^13", spiral);
    add("Mbeta", 10, 40, "construction not transcribed", none);
    add("Mn1_Nonlinear", 18, 72, "construction not transcribed", none);
    add("Mn2_Nonlinear", 24, 96, "construction not transcribed", none);
    add("Mp1_Paraboloid", 3, 12, "construction not transcribed", none);
    add("Mp2_Paraboloid", 6, 21, "construction not transcribed", none);
    add("Mp3_Paraboloid", 9, 30, "construction not transcribed", none);
    add("sphere", 0, 0, "uniform d-sphere in R^{d+1}, zero-padded", none);
    add("gaussian", 0, 0, "standard Gaussian in R^d, zero-padded", none);
    add("cube", 0, 0, "uniform unit d-cube, zero-padded", none);
    for (std::size_t i = t.size() - 3; i < t.size(); ++i) t[i].info.implemented = true;
    return t;
  }();
  return table;
}

std::string available_ids() {
  std::string ids;
  for (const auto& e : entries())
    if (e.info.implemented) ids += (ids.empty() ? "" : ", ") + e.info.name;
  return ids;
}

const Entry& find_entry(const std::string& name) {
  for (const auto& e : entries())
    if (e.info.name == name) return e;
  throw Error(ErrorCode::NotImplemented,
              "unknown manifold '" + name + "'; available: " + available_ids());
}

bool is_builtin(const ManifoldInfo& info) { return info.intrinsic_d == 0; }

}  // namespace

const std::vector<ManifoldInfo>& manifold_catalog() {
  static const std::vector<ManifoldInfo> infos = [] {
    std::vector<ManifoldInfo> out;
    for (const auto& e : entries()) out.push_back(e.info);
    return out;
  }();
  return infos;
}

const ManifoldInfo& manifold_info(const std::string& name) { return find_entry(name).info; }

ManifoldSpec resolve(const ManifoldSpec& spec) {
  const ManifoldInfo& info = find_entry(spec.name).info;
  ManifoldSpec out = spec;
  if (is_builtin(info)) {
    if (out.intrinsic_d < 1)
      throw Error(ErrorCode::InvalidArgument, "builtin '" + spec.name + "' needs an intrinsic dimension");
    if (out.ambient_D == 0) out.ambient_D = out.intrinsic_d + (spec.name == "sphere" ? 1 : 0);
    const int min_ambient = out.intrinsic_d + (spec.name == "sphere" ? 1 : 0);
    if (out.ambient_D < min_ambient)
      throw Error(ErrorCode::InvalidArgument, "'" + spec.name + "' of dimension " +
                                                  std::to_string(out.intrinsic_d) +
                                                  " needs ambient dimension >= " +
                                                  std::to_string(min_ambient));
  } else {
    if (out.intrinsic_d == 0) out.intrinsic_d = info.intrinsic_d;
    if (out.ambient_D == 0) out.ambient_D = info.ambient_D;
    if (out.intrinsic_d != info.intrinsic_d || out.ambient_D != info.ambient_D)
      throw Error(ErrorCode::InvalidArgument,
                  spec.name + " is fixed at d=" + std::to_string(info.intrinsic_d) +
                      ", D=" + std::to_string(info.ambient_D));
  }
  if (!(out.noise_sigma >= 0)) throw Error(ErrorCode::InvalidArgument, "noise sigma must be >= 0");
  if (out.n < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 points");
  return out;
}

PointCloud generate(const ManifoldSpec& raw) {
  const ManifoldSpec spec = resolve(raw);
  const Entry& entry = find_entry(spec.name);
  if (!entry.info.implemented)
    throw Error(ErrorCode::NotImplemented, spec.name +
                                               " has no generator in this build; available: " +
                                               available_ids());

  PointCloud cloud;
  if (spec.name == "sphere") {
    cloud = sphere_uniform(spec.intrinsic_d, spec.n, spec.ambient_D, spec.seed);
  } else if (spec.name == "cube") {
    cloud = cube_uniform(spec.intrinsic_d, spec.n, spec.ambient_D, spec.seed);
  } else if (spec.name == "gaussian") {
    Rng rng(spec.seed);
    cloud = gaussian(spec.n, spec.intrinsic_d, spec.ambient_D, rng);
  } else {
    Rng rng(spec.seed);
    cloud = entry.make(spec.n, rng);
  }
  if (spec.noise_sigma > 0) cloud = add_noise(cloud, spec.noise_sigma, derive_seed(spec.seed, {1}));
  return cloud;
}

PointCloud sphere_uniform(int d, Index n, int ambient_D, std::uint64_t seed) {
  if (d < 1 || n < 1 || ambient_D < d + 1)
    throw Error(ErrorCode::InvalidArgument, "sphere needs d >= 1 and ambient_D >= d + 1");
  Rng rng(seed);
  return sphere(n, d, ambient_D, rng);
}

PointCloud cube_uniform(int d, Index n, int ambient_D, std::uint64_t seed) {
  if (d < 1 || n < 1 || ambient_D < d)
    throw Error(ErrorCode::InvalidArgument, "cube needs d >= 1 and ambient_D >= d");
  Rng rng(seed);
  PointCloud p = PointCloud::Zero(n, ambient_D);
  p.leftCols(d) = uniform_box(n, d, rng);
  return p;
}

PointCloud add_noise(const PointCloud& cloud, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0)) throw Error(ErrorCode::InvalidArgument, "noise sigma must be >= 0");
  if (sigma == 0) return cloud;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  PointCloud out = cloud;
  for (Index i = 0; i < out.size(); ++i) out.data()[i] += normal(rng);
  return out;
}

}  // namespace l2n2
