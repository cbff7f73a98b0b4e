#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gbc/curvature.hpp"

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

double norm(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

TEST(Christoffel, ConformallyFlatClosedForm) {
  // g = e^{2 phi} delta: Gamma^i_jk = delta^i_j phi_k + delta^i_k phi_j - delta_jk phi_i.
  const int n = 4;
  const double p = 1.3, c = 0.7, q = 1.1;
  const auto f = make_family("conformal_radial", n, {{"p", p}, {"c", c}, {"q", q}});
  std::mt19937_64 rng(1);
  for (int t = 0; t < 10; ++t) {
    const auto x = random_point(n, rng, 1.0, 6.0);
    const double r = norm(x);
    // phi = (p/2) log(1 + c r^{-q}); d_i phi = (p/2) (-c q r^{-q-2} x_i) / (1 + c r^{-q}).
    std::vector<double> dphi(n);
    for (int i = 0; i < n; ++i)
      dphi[i] = 0.5 * p * (-c * q * std::pow(r, -q - 2.0) * x[i]) / (1.0 + c * std::pow(r, -q));
    const auto gamma = christoffel(f.eval(x));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const double want =
              (i == j ? dphi[k] : 0.0) + (i == k ? dphi[j] : 0.0) - (j == k ? dphi[i] : 0.0);
          EXPECT_NEAR(gamma(i, j, k), want, 1e-13);
        }
  }
}

TEST(Scalar, ConformalFactorClosedForm) {
  // g = u^{4/(n-2)} delta: R = -4 (n-1)/(n-2) u^{-(n+2)/(n-2)} Laplacian(u).
  for (int n : {3, 5}) {
    const double c = 0.8, q = 0.9;
    const auto f = make_family("conformal_radial", n, {{"p", 4.0 / (n - 2)}, {"c", c}, {"q", q}});
    std::mt19937_64 rng(n);
    for (int t = 0; t < 20; ++t) {
      const auto x = random_point(n, rng, 1.0, 8.0);
      const double r = norm(x);
      const double u = 1.0 + c * std::pow(r, -q);
      const double lap = c * q * (q - (n - 2)) * std::pow(r, -q - 2.0);
      const double want = -4.0 * (n - 1) / (n - 2) * std::pow(u, -(n + 2.0) / (n - 2.0)) * lap;
      const auto b = make_bundle(f, x, {1});
      EXPECT_NEAR(b.scalar, want, 1e-12 * std::abs(want) + 1e-15);
      EXPECT_NEAR(b.lk.at(1), want, 1e-12 * std::abs(want) + 1e-15);
    }
  }
}

TEST(Scalar, LanczosOnRandomMetric) {
  const int n = 5;
  const auto f = make_family("random_af", n, {{"amplitude", 0.4}, {"tau", 1.0}});
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const auto x = random_point(n, rng, 1.5, 4.0);
    const auto b = make_bundle(f, x, {2});
    // |Rm|^2 - 4 |Ric|^2 + R^2 from explicit index raising.
    const Matrix& gi = b.ginv;
    double rm = 0.0, ric = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            double up = 0.0;
            for (int a = 0; a < n; ++a)
              for (int bb = 0; bb < n; ++bb)
                for (int cc = 0; cc < n; ++cc)
                  for (int d = 0; d < n; ++d)
                    up += gi(i, a) * gi(j, bb) * gi(k, cc) * gi(l, d) * b.riemann_low(a, bb, cc, d);
            rm += up * b.riemann_low(i, j, k, l);
          }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double up = 0.0;
        for (int a = 0; a < n; ++a)
          for (int bb = 0; bb < n; ++bb) up += gi(i, a) * gi(j, bb) * b.ricci(a, bb);
        ric += up * b.ricci(i, j);
      }
    const double want = rm - 4.0 * ric + b.scalar * b.scalar;
    EXPECT_NEAR(b.lk.at(2), want, 1e-10 * rm);
  }
}

TEST(ConstantCurvature, OrdersAndLovelockTensor) {
  for (int n : {4, 5, 6}) {
    const double kappa = 1.7;
    const auto f = make_family("constant_curvature", n, {{"kappa", kappa}});
    std::mt19937_64 rng(n);
    const auto x = random_point(n, rng, 0.1, 1.0);
    const auto b = make_bundle(f, x, {n / 2});
    for (int k = 1; 2 * k <= n; ++k) {
      double want = std::pow(kappa, k);
      for (int m = n; m > n - 2 * k; --m) want *= m;
      EXPECT_NEAR(b.lk.at(k), want, 1e-9 * want) << n << " " << k;
      if (2 * k == n) continue;
      // Isotropy: E^(k) = tr / n identity, and tr = -(n-2k)/2 L_k.
      const auto& e = b.lovelock.at(k);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          EXPECT_NEAR(e(i, j), (i == j) ? -(n - 2.0 * k) / (2.0 * n) * want : 0.0, 1e-9 * want);
    }
  }
}

TEST(PTensor, FlatFirstOrder) {
  const int n = 4;
  const auto b = make_bundle(make_family("flat", n), std::vector<double>{1.0, 2.0, 0.5, -1.0}, {1});
  const auto& p = b.p_tensor.at(1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l)
        for (int s = 0; s < n; ++s) {
          const double want = 0.5 * ((i == l) * (j == s) - (i == s) * (j == l));
          EXPECT_DOUBLE_EQ(p(i, j, l, s), want);
        }
  EXPECT_EQ(b.lk.at(1), 0.0);
}

TEST(PTensor, ContractsToLk) {
  const int n = 5;
  const auto f = make_family("random_af", n, {{"amplitude", 0.3}, {"tau", 1.2}, {"seed", 3}});
  std::mt19937_64 rng(4);
  const auto x = random_point(n, rng, 1.5, 4.0);
  const auto b = make_bundle(f, x, {2});
  for (int k = 1; k <= 2; ++k) {
    const auto& p = b.p_tensor.at(k);
    double v = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
          for (int s = 0; s < n; ++s) v += p(i, j, l, s) * b.riemann_low(i, j, l, s);
    EXPECT_NEAR(v, b.lk.at(k), 1e-10 * std::max(1.0, std::abs(b.lk.at(k))));
    EXPECT_LT(p.symmetry_residual(), 1e-12);
  }
}

TEST(Lovelock, FirstOrderIsEinstein) {
  const int n = 4;
  const auto f = make_family("random_af", n, {{"amplitude", 0.5}, {"tau", 1.0}});
  std::mt19937_64 rng(5);
  const auto x = random_point(n, rng, 1.5, 3.0);
  const auto b = make_bundle(f, x, {1});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double ric = 0.0;
      for (int a = 0; a < n; ++a) ric += b.ginv(i, a) * b.ricci(a, j);
      EXPECT_NEAR(b.lovelock.at(1)(i, j), ric - (i == j ? 0.5 * b.scalar : 0.0), 1e-12);
    }
  const auto e0 = lovelock_tensor(b, 0);
  EXPECT_EQ(e0(2, 2), 1.0);
  EXPECT_EQ(e0(1, 2), 0.0);
}

TEST(Lovelock, TraceIdentityOnSphere) {
  const int n = 5;
  const auto f = make_family("constant_curvature", n);
  const auto b = make_bundle(f, std::vector<double>{0.2, 0.1, -0.3, 0.4, 0.0}, {2});
  double tr = 0.0;
  for (int i = 0; i < n; ++i) tr += b.lovelock.at(2)(i, i);
  EXPECT_NEAR(tr, -0.5 * (n - 4) * b.lk.at(2), 1e-10 * b.lk.at(2));
}

TEST(Divergence, MetricAndTensorsAreDivergenceFree) {
  const int n = 5;
  const auto f = make_family("random_af", n, {{"amplitude", 0.3}, {"tau", 1.0}, {"seed", 2}});
  const std::vector<double> x{1.0, 2.0, -1.5, 0.5, 1.0};
  TensorField ginv = [&](std::span<const double> y) {
    const Matrix m = spd_inverse(f.eval(y).metric_matrix());
    DenseTensor t(n, {Variance::upper, Variance::upper});
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) t(i, j) = m(i, j);
    return t;
  };
  // nabla g^{-1} = 0 but partial derivatives do not vanish: second-order decay.
  const double d1 = covariant_divergence(ginv, f, x, 1e-2).max_abs();
  const double d2 = covariant_divergence(ginv, f, x, 5e-3).max_abs();
  EXPECT_NEAR(d1 / d2, 4.0, 0.5);
  for (int which = 0; which < 2; ++which) {
    TensorField field = [&](std::span<const double> y) {
      const auto b = make_bundle(f, y, {2, 2});
      return which == 0 ? b.p_tensor.at(2) : b.lovelock.at(2);
    };
    const double c = covariant_divergence(field, f, x, 1e-2).max_abs();
    const double fine = covariant_divergence(field, f, x, 5e-3).max_abs();
    EXPECT_GT(c / fine, 3.5) << which;
    EXPECT_LT(c / fine, 4.5) << which;
  }
}

TEST(Contracts, OrderRange) {
  const auto b = make_bundle(make_family("flat", 4), std::vector<double>{1, 1, 1, 1});
  EXPECT_THROW(p_tensor(b, 2), ContractViolation);
  EXPECT_THROW(lovelock_tensor(b, 2), ContractViolation);
  EXPECT_THROW(lk_scalar(b, 3), ContractViolation);
  EXPECT_NO_THROW(lk_scalar(b, 2));
  EXPECT_THROW(p_tensor(b, 0), ContractViolation);
}
