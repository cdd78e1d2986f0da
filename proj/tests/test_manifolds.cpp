#include <doctest.h>

#include <cmath>
#include <numbers>

#include "l2n2/manifolds.hpp"

using namespace l2n2;

namespace {

// Numerical rank of the centered cloud.
Index centered_rank(const PointCloud& cloud) {
  const Eigen::MatrixXd centered = cloud.rowwise() - cloud.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
  const auto& s = svd.singularValues();
  return (s.array() > 1e-9 * s(0)).count();
}

ManifoldSpec named(const std::string& name, Index n = 500, std::uint64_t seed = 1) {
  ManifoldSpec s;
  s.name = name;
  s.n = n;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("sphere points have unit norm and zero padding") {
  const PointCloud p = sphere_uniform(6, 400, 11, 3);
  REQUIRE(p.cols() == 11);
  CHECK((p.rowwise().norm().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(p.rightCols(4).isZero(0));
  CHECK(centered_rank(p) == 7);
  // Uniform on the sphere: each coordinate has mean 0 and variance 1/(d+1).
  const PointCloud big = sphere_uniform(2, 20000, 3, 4);
  CHECK(std::abs(big.col(0).mean()) < 0.02);
  CHECK(big.col(1).squaredNorm() / 20000 == doctest::Approx(1.0 / 3).epsilon(0.03));
}

TEST_CASE("cube points lie in the unit cube") {
  const PointCloud p = cube_uniform(3, 300, 5, 2);
  CHECK(p.leftCols(3).minCoeff() >= 0);
  CHECK(p.leftCols(3).maxCoeff() <= 1);
  CHECK(p.rightCols(2).isZero(0));
}

TEST_CASE("generation is seeded") {
  const ManifoldSpec s = named("M7_Roll");
  CHECK(generate(s) == generate(s));
  CHECK_FALSE(generate(s) == generate(named("M7_Roll", 500, 2)));
}

TEST_CASE("tier-1 shapes") {
  SUBCASE("M1 is the unit 10-sphere") {
    const PointCloud p = generate(named("M1_Sphere"));
    CHECK(p.cols() == 11);
    CHECK((p.rowwise().norm().array() - 1.0).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("affine images have full intrinsic rank") {
    CHECK(centered_rank(generate(named("M2_Affine_3to5"))) == 3);
    CHECK(centered_rank(generate(named("M9_Affine"))) == 20);
    CHECK(generate(named("M2_Affine_3to5")).cols() == 5);
  }
  SUBCASE("padded cubes") {
    const PointCloud p = generate(named("M10b_Cubic"));
    CHECK(p.cols() == 18);
    CHECK(p.col(17).isZero(0));
    CHECK(centered_rank(p) == 17);
  }
  SUBCASE("closed helix satisfies its implicit equation") {
    const PointCloud p = generate(named("M5a_Helix1d"));
    for (Index i = 0; i < p.rows(); ++i) {
      const double rho = std::hypot(p(i, 0), p(i, 1));
      const double t = std::atan2(p(i, 1), p(i, 0));
      CHECK(rho == doctest::Approx(2 + std::cos(8 * t)));
      CHECK(p(i, 2) == doctest::Approx(std::sin(8 * t)).epsilon(1e-9));
    }
  }
  SUBCASE("swiss roll radius equals its angle") {
    const PointCloud p = generate(named("M7_Roll"));
    for (Index i = 0; i < p.rows(); ++i) {
      const double r = std::hypot(p(i, 0), p(i, 2));
      CHECK(r >= 1.5 * std::numbers::pi - 1e-12);
      CHECK(r <= 4.5 * std::numbers::pi + 1e-12);
      CHECK(p(i, 1) >= 0);
      CHECK(p(i, 1) <= 21);
    }
  }
  SUBCASE("spiral is planar in R^13") {
    const PointCloud p = generate(named("M13b_Spiral"));
    CHECK(p.cols() == 13);
    CHECK(centered_rank(p) == 2);
    CHECK(p.rowwise().norm().minCoeff() >= std::numbers::pi - 1e-9);
  }
  SUBCASE("Gaussian in R^20") { CHECK(centered_rank(generate(named("M12_Norm"))) == 20); }
  SUBCASE("surfaces in R^3") {
    for (const char* name : {"M5b_Helix2d", "M11_Moebius", "M13a_Scurve"}) {
      const PointCloud p = generate(named(name));
      CHECK(p.cols() == 3);
      CHECK(p.allFinite());
    }
  }
}

TEST_CASE("noise is additive Gaussian") {
  ManifoldSpec s;
  s.name = "sphere";
  s.intrinsic_d = 6;
  s.ambient_D = 11;
  s.n = 4000;
  s.seed = 5;
  const PointCloud clean = generate(s);
  s.noise_sigma = 0.1;
  const PointCloud noisy = generate(s);
  const PointCloud diff = noisy - clean;
  const double sd = std::sqrt(diff.squaredNorm() / static_cast<double>(diff.size()));
  CHECK(sd == doctest::Approx(0.1).epsilon(0.02));
}

TEST_CASE("catalog and errors") {
  CHECK(manifold_info("M7_Roll").intrinsic_d == 2);
  CHECK(manifold_info("M7_Roll").implemented);
  CHECK_FALSE(manifold_info("M6_Nonlinear").implemented);
  try {
    generate(named("M6_Nonlinear"));
    FAIL("expected not-implemented");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotImplemented);
    CHECK(std::string(e.what()).find("M7_Roll") != std::string::npos);
  }
  CHECK_THROWS_AS(generate(named("no_such_thing")), Error);
  ManifoldSpec s = named("sphere");
  CHECK_THROWS_AS(generate(s), Error);  // needs a dimension
  s.intrinsic_d = 3;
  s.ambient_D = 3;
  CHECK_THROWS_AS(generate(s), Error);
  s = named("M7_Roll");
  s.intrinsic_d = 3;
  CHECK_THROWS_AS(resolve(s), Error);
  CHECK(resolve(named("M7_Roll")).ambient_D == 3);
}
