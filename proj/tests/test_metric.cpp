#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gbc/curvature.hpp"
#include "gbc/metric.hpp"

using namespace gbc;

namespace {

std::vector<double> random_point(int n, std::mt19937_64& rng, double rmin, double rmax) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(rmin, rmax);
  std::vector<double> x(n);
  double s = 0.0;
  for (double& v : x) {
    v = g(rng);
    s += v * v;
  }
  const double r = u(rng) / std::sqrt(s);
  for (double& v : x) v *= r;
  return x;
}

}  // namespace

TEST(Families, SchwarzschildComponentAtKnownPoint) {
  const auto f = make_family("schwarzschild_isotropic", 3, {{"m", 1.0}});
  const std::vector<double> x{2.0, 0.0, 0.0};
  const auto s = f.eval(x);
  EXPECT_NEAR(s.metric(0, 0), std::pow(1.25, 4), 1e-14);
  EXPECT_NEAR(s.metric(1, 1), std::pow(1.25, 4), 1e-14);
  EXPECT_EQ(s.metric(0, 1), 0.0);
  // d_r psi^4 = 4 psi^3 (-m / (2 r^2)) at r = 2.
  EXPECT_NEAR(s.d1(0, 0, 0), 4.0 * std::pow(1.25, 3) * (-1.0 / 8.0), 1e-14);
  EXPECT_EQ(f.decay_tau().value(), 1.0);
}

TEST(Families, ConformalRadialHigherDimension) {
  const auto f = make_family("conformal_radial", 5, {{"p", 2.0}, {"c", 0.5}, {"q", 0.6}});
  const std::vector<double> x{0.0, 3.0, 0.0, 4.0, 0.0};
  const double want = std::pow(1.0 + 0.5 * std::pow(5.0, -0.6), 2.0);
  EXPECT_NEAR(f.eval(x).metric(2, 2), want, 1e-14);
  EXPECT_EQ(f.decay_tau().value(), 0.6);
}

TEST(Families, StereographicSphereValue) {
  const auto f = make_family("constant_curvature", 3, {{"kappa", 2.0}});
  const std::vector<double> x{0.5, 0.0, 0.0};
  EXPECT_NEAR(f.eval(x).metric(0, 0), 4.0 / std::pow(1.5, 2), 1e-14);
  EXPECT_FALSE(f.asymptotically_flat());
}

TEST(Families, RandomAfIsHomogeneousOfDegreeMinusTau) {
  const double tau = 1.7;
  const auto f = make_family("random_af", 4, {{"amplitude", 0.3}, {"tau", tau}, {"seed", 5}});
  std::mt19937_64 rng(1);
  for (int t = 0; t < 10; ++t) {
    const auto x = random_point(4, rng, 2.0, 5.0);
    std::vector<double> y(x);
    for (double& v : y) v *= 3.0;
    const auto a = f.eval(x), b = f.eval(y);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const double d = (i == j) ? 1.0 : 0.0;
        EXPECT_NEAR(b.metric(i, j) - d, std::pow(3.0, -tau) * (a.metric(i, j) - d), 1e-14);
        EXPECT_EQ(a.metric(i, j), a.metric(j, i));
      }
  }
}

TEST(Families, RandomAfSeedDeterminism) {
  const auto a = make_family("random_af", 5, {{"seed", 9}});
  const auto b = make_family("random_af", 5, {{"seed", 9}});
  const auto c = make_family("random_af", 5, {{"seed", 10}});
  const std::vector<double> x{1.0, -2.0, 0.5, 3.0, 1.5};
  EXPECT_EQ(a.eval(x).g, b.eval(x).g);
  EXPECT_EQ(a.eval(x).d2g, b.eval(x).d2g);
  EXPECT_NE(a.eval(x).g, c.eval(x).g);
}

TEST(Families, ContractViolations) {
  EXPECT_THROW(make_family("nope", 3), ContractViolation);
  EXPECT_THROW(make_family("flat", 1), ContractViolation);
  EXPECT_THROW(make_family("schwarzschild_isotropic", 3, {{"q", 1.0}}), ContractViolation);
  EXPECT_THROW(make_family("conformal_radial", 3, {{"q", -1.0}}), ContractViolation);
  EXPECT_THROW(make_family("constant_curvature", 3, {{"kappa", 0.0}}), ContractViolation);
  const auto f = make_family("flat", 3);
  const std::vector<double> wrong{1.0, 2.0};
  EXPECT_THROW(f.eval(wrong), ContractViolation);
}

TEST(Derivatives, FiniteDifferenceResidualIsSecondOrder) {
  std::mt19937_64 rng(2);
  for (const char* name : {"schwarzschild_isotropic", "conformal_radial", "random_af"}) {
    const auto f = make_family(name, 4);
    const auto x = random_point(4, rng, 2.0, 4.0);
    const auto coarse = fd_validate(f, x, 1e-2), fine = fd_validate(f, x, 5e-3);
    EXPECT_NEAR(coarse.first / fine.first, 4.0, 0.5) << name;
    EXPECT_NEAR(coarse.second / fine.second, 4.0, 0.5) << name;
  }
}

TEST(Derivatives, ConformalResidualSmallAtModerateRadius) {
  const auto f = make_family("conformal_radial", 3);
  const std::vector<double> x{6.0, 0.0, 8.0};
  const auto res = fd_validate(f, x, 1e-3);
  EXPECT_LT(res.first, 1e-6);
  EXPECT_LT(res.second, 1e-6);
}

TEST(Rotation, PullbackComponents) {
  const auto f = make_family("random_af", 3, {{"seed", 4}});
  Matrix rot(3);
  const double c = std::cos(0.4), s = std::sin(0.4);
  rot(0, 0) = c;
  rot(0, 1) = -s;
  rot(1, 0) = s;
  rot(1, 1) = c;
  rot(2, 2) = 1.0;
  const auto fr = f.rotated(rot);
  const std::vector<double> y{1.5, -2.0, 2.5};
  std::vector<double> x(3, 0.0);
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < 3; ++a) x[i] += rot(i, a) * y[a];
  const auto gx = f.eval(x), gy = fr.eval(y);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      double v = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) v += rot(i, a) * rot(j, b) * gx.metric(i, j);
      EXPECT_NEAR(gy.metric(a, b), v, 1e-14);
    }
  const auto res = fd_validate(fr, y, 1e-3);
  EXPECT_LT(res.first, 1e-5);
  EXPECT_LT(res.second, 1e-5);
}

TEST(Decay, ConstantStaysBounded) {
  const auto f = make_family("random_af", 4, {{"tau", 1.5}});
  const double c10 = decay_constant(f, 10.0, 20), c1000 = decay_constant(f, 1000.0, 20);
  EXPECT_GT(c10, 0.0);
  EXPECT_LT(c1000 / c10, 2.0);
  EXPECT_GT(c1000 / c10, 0.5);
  EXPECT_THROW(decay_constant(make_family("constant_curvature", 3), 1.0, 5), ContractViolation);
}

TEST(Curvature, SchwarzschildThreeIsScalarFlat) {
  const auto f = make_family("schwarzschild_isotropic", 3, {{"m", 1.5}});
  std::mt19937_64 rng(8);
  for (int t = 0; t < 50; ++t) {
    const auto x = random_point(3, rng, 1.0, 20.0);
    const auto b = make_bundle(f, x);
    EXPECT_NEAR(b.scalar, 0.0, 1e-12 * std::max(1.0, std::sqrt(riemann_norm_sq(b))));
  }
}

TEST(Curvature, StereographicSphereScalar) {
  const auto f = make_family("constant_curvature", 2);
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    const auto x = random_point(2, rng, 0.1, 2.0);
    EXPECT_NEAR(make_bundle(f, x).scalar, 2.0, 1e-12);
  }
}
