#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gbc/frame.hpp"
#include "gbc/quadrature.hpp"

using namespace gbc;

namespace {

DifferentialForm random_form(int n, int p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DifferentialForm f(n, p);
  for (double& c : f.coeffs()) c = u(rng);
  return f;
}

double max_diff(const DifferentialForm& a, const DifferentialForm& b) { return (a - b).max_abs(); }

}  // namespace

TEST(Forms, WedgeOfBasisOneForms) {
  const auto e0 = DifferentialForm::basis_one_form(3, 0), e1 = DifferentialForm::basis_one_form(3, 1),
             e2 = DifferentialForm::basis_one_form(3, 2);
  EXPECT_EQ(wedge(e0, e1).coeff({0, 1}), 1.0);
  EXPECT_EQ(wedge(e1, e0).coeff({0, 1}), -1.0);
  EXPECT_EQ(wedge(e0, e0).max_abs(), 0.0);
  EXPECT_EQ(wedge(e2, e0, e1).top(), 1.0);
  EXPECT_EQ(wedge(e1, e0, e2).top(), -1.0);
  EXPECT_THROW(wedge(wedge(e0, e1), wedge(e1, e2)), ContractViolation);
}

TEST(Forms, GradedCommutativityAndAssociativity) {
  std::mt19937_64 rng(1);
  const int n = 6;
  for (int p = 0; p <= 3; ++p)
    for (int q = 0; p + q <= n; ++q) {
      const auto a = random_form(n, p, rng), b = random_form(n, q, rng);
      const double sign = ((p * q) % 2) ? -1.0 : 1.0;
      EXPECT_LT(max_diff(wedge(a, b), sign * wedge(b, a)), 1e-14);
    }
  const auto a = random_form(n, 1, rng), b = random_form(n, 2, rng), c = random_form(n, 2, rng);
  EXPECT_LT(max_diff(wedge(wedge(a, b), c), wedge(a, wedge(b, c))), 1e-13);
}

TEST(Forms, HodgeStarTwiceIsSign) {
  std::mt19937_64 rng(2);
  for (int n = 2; n <= 6; ++n)
    for (int p = 0; p <= n; ++p) {
      const auto a = random_form(n, p, rng);
      const double sign = ((p * (n - p)) % 2) ? -1.0 : 1.0;
      EXPECT_LT(max_diff(hodge_star(hodge_star(a)), sign * a), 1e-15);
      // a ^ *a = |a|^2 vol
      double norm2 = 0.0;
      for (double c : a.coeffs()) norm2 += c * c;
      EXPECT_NEAR(wedge(a, hodge_star(a)).top(), norm2, 1e-13);
    }
}

TEST(Forms, ChangeCoframeIsPullback) {
  // theta^a = C(a, i) dx^i; a wedge of thetas equals the wedge of their coordinate expressions.
  std::mt19937_64 rng(3);
  const int n = 4;
  Matrix c(n);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i) c(a, i) = u(rng);
  std::vector<DifferentialForm> th;
  for (int a = 0; a < n; ++a) {
    std::vector<double> row(n);
    for (int i = 0; i < n; ++i) row[i] = c(a, i);
    th.push_back(DifferentialForm::one_form(row));
  }
  const auto frame_form = wedge(DifferentialForm::basis_one_form(n, 0), DifferentialForm::basis_one_form(n, 2));
  EXPECT_LT(max_diff(change_coframe(frame_form, c), wedge(th[0], th[2])), 1e-14);
  DifferentialForm vol(n, n);
  vol.coeffs()[0] = 1.0;
  EXPECT_NEAR(change_coframe(vol, c).top(), determinant(c), 1e-14);
}

TEST(Forms, ExteriorDerivativeExamples) {
  FormField f = [](std::span<const double> x) {
    DifferentialForm w(3, 1);
    w.coeffs()[1] = x[0];  // x0 dx1
    return w;
  };
  const std::vector<double> p{0.3, -0.2, 1.1};
  const auto d = exterior_derivative_fd(f, p, 1e-3);
  EXPECT_NEAR(d.coeff({0, 1}), 1.0, 1e-12);
  EXPECT_NEAR(d.coeff({0, 2}), 0.0, 1e-12);
  // d(d g) = 0 for g = sin(x0) x1^2 + x2^3 x0.
  FormField dg = [](std::span<const double> x) {
    DifferentialForm w(3, 1);
    w.coeffs()[0] = std::cos(x[0]) * x[1] * x[1] + x[2] * x[2] * x[2];
    w.coeffs()[1] = 2.0 * std::sin(x[0]) * x[1];
    w.coeffs()[2] = 3.0 * x[2] * x[2] * x[0];
    return w;
  };
  EXPECT_LT(exterior_derivative_fd(dg, p, 1e-3, 6).max_abs(), 1e-9);
  EXPECT_THROW(exterior_derivative_fd(dg, p, 1e-3, 3), ContractViolation);
}

TEST(Forms, FluxOfRadialField) {
  // b = i_X vol with X = x: flux density through the unit normal is x . N = r.
  const int n = 4;
  const std::vector<double> x{1.0, 2.0, -2.0, 4.0};
  DifferentialForm b(n, n - 1);
  const std::uint32_t full = 15;
  for (int i = 0; i < n; ++i) b.at_mask(full & ~(1u << i)) = ((i & 1) ? -1.0 : 1.0) * x[i];
  std::vector<double> nrm(x);
  for (double& v : nrm) v /= 5.0;
  EXPECT_NEAR(flux_density(b, nrm), 5.0, 1e-14);
}

TEST(Frame, FlatAdaptedConnection) {
  const int n = 4;
  const auto f = make_family("flat", n);
  const std::vector<double> x{1.0, -2.0, 0.5, 2.0};
  const double r = std::sqrt(1.0 + 4.0 + 0.25 + 4.0);
  const Frame fr = build_adapted_frame(f, x);
  for (int i = 0; i < n; ++i) EXPECT_NEAR(fr.e(n - 1, i), x[i] / r, 1e-15);
  const Matrix h = fr.shape();
  for (int i = 0; i < n - 1; ++i)
    for (int j = 0; j < n - 1; ++j) EXPECT_NEAR(h(i, j), (i == j) ? -1.0 / r : 0.0, 1e-14);
  Matrix e(n);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i) e(a, i) = fr.e(a, i);
  EXPECT_GT(determinant(e), 0.0);
}

TEST(Frame, OrthonormalOnCurvedMetrics) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (const char* name : {"schwarzschild_isotropic", "random_af", "conformal_radial"}) {
    const auto f = make_family(name, 5);
    for (int t = 0; t < 10; ++t) {
      std::vector<double> x(5);
      for (double& v : x) v = 2.0 * g(rng);
      const auto s = f.eval(x);
      const Frame fr = build_adapted_frame(f, x);
      EXPECT_LT(fr.orthonormality_residual(s.metric_matrix()), 1e-12) << name;
    }
  }
}

TEST(Frame, ConnectionMatchesRebuiltFrameDifferences) {
  const int n = 4;
  const auto f = make_family("random_af", n, {{"amplitude", 0.4}, {"tau", 1.0}});
  const std::vector<double> x{1.2, -0.7, 2.0, 0.9};
  for (const FrameSpec spec : {adapted_spec_at(x), coordinate_spec()}) {
    auto frame_at = [&](std::span<const double> y) {
      const auto s = f.eval(y);
      const Matrix gi = spd_inverse(s.metric_matrix());
      return build_frame(s, gi, christoffel(s, gi), y, spec);
    };
    const Frame fr = frame_at(x);
    const auto s = f.eval(x);
    const auto gamma = christoffel(s);
    const double h = 1e-4;
    // d_k e_a^i by central differences of the rebuilt frame.
    std::vector<double> de(n * n * n);
    std::vector<double> y(x);
    for (int k = 0; k < n; ++k) {
      y[k] = x[k] + h;
      const Frame p = frame_at(y);
      y[k] = x[k] - h;
      const Frame m = frame_at(y);
      y[k] = x[k];
      for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i) de[(k * n + a) * n + i] = (p.e(a, i) - m.e(a, i)) / (2.0 * h);
    }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          // g(nabla_{e_c} e_a, e_b)
          double v = 0.0;
          for (int i = 0; i < n; ++i) {
            double cov = 0.0;
            for (int k = 0; k < n; ++k) {
              double t = de[(k * n + a) * n + i];
              for (int l = 0; l < n; ++l) t += gamma(i, k, l) * fr.e(a, l);
              cov += fr.e(c, k) * t;
            }
            for (int j = 0; j < n; ++j) v += cov * s.metric(i, j) * fr.e(b, j);
          }
          EXPECT_NEAR(fr.conn(a, b, c), v, 1e-8);
          EXPECT_NEAR(fr.conn(a, b, c), -fr.conn(b, a, c), 1e-13);
        }
  }
}

TEST(Frame, RoundSphereCurvatureForms) {
  const int n = 4;
  const double kappa = 1.5;
  const auto f = make_family("constant_curvature", n, {{"kappa", kappa}});
  const std::vector<double> x{0.2, 0.3, -0.1, 0.4};
  const auto b = make_bundle(f, x);
  const Frame fr = build_frame(b, adapted_spec_at(x));
  const auto curv = curvature_two_forms(b, fr);
  const auto sflip = curvature_two_forms(b, fr, CurvatureSign::structure);
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      const auto want = kappa * wedge(DifferentialForm::basis_one_form(n, a), DifferentialForm::basis_one_form(n, c));
      EXPECT_LT(max_diff(curv(a, c), want), 1e-12);
      EXPECT_LT(max_diff(sflip(a, c), -1.0 * want), 1e-12);
    }
}

TEST(Chern, TransgressionInTwoDimensions) {
  const auto f = make_family("constant_curvature", 2);
  const std::vector<double> x{0.3, 0.4};
  const auto b = make_bundle(f, x);
  const Frame fr = build_frame(b, adapted_spec_at(x));
  const auto omega = connection_forms(fr);
  const auto curv = curvature_two_forms(b, fr, CurvatureSign::structure);
  EXPECT_LT(max_diff(transgression_pi(omega, curv), 2.0 * omega(0, 1)), 1e-15);
  EXPECT_THROW(transgression_pi(connection_forms(build_adapted_frame(make_family("flat", 3), std::vector<double>{1, 1, 1})),
                                curv),
               ContractViolation);
}

TEST(Chern, FlatPhiZeroIntegratesToSphereArea) {
  for (int n : {3, 4}) {
    const auto f = make_family("flat", n);
    const SphereQuadrature quad(n, 4);
    const double r = 3.0;
    const double total = integrate_sphere(
        [&](std::span<const double> y) {
          const auto b = make_bundle(f, y);
          const Frame fr = build_frame(b, adapted_spec_at(y));
          const auto phi = chern_phi(0, connection_forms(fr), curvature_two_forms(b, fr));
          std::vector<double> nrm(y.begin(), y.end());
          for (double& v : nrm) v /= r;
          return flux_density(to_coordinates(phi, fr), nrm);
        },
        quad, r);
    EXPECT_NEAR(total, factorial(n - 1) * unit_sphere_area(n), 1e-10) << n;
  }
}

TEST(QForms, FlatFirstOrder) {
  const int n = 4;
  const auto f = make_family("flat", n);
  const std::vector<double> x{1.0, 0.5, -0.5, 2.0};
  const auto b = make_bundle(f, x, {1});
  const Frame fr = build_frame(b, adapted_spec_at(x));
  const auto q = q_and_star_q(b, fr, curvature_two_forms(b, fr), 1);
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      const auto want = wedge(DifferentialForm::basis_one_form(n, a), DifferentialForm::basis_one_form(n, c));
      EXPECT_LT(max_diff(q.q(a, c), want), 1e-14);
      if (a != c) {
        EXPECT_LT(max_diff(q.star_q(a, c), hodge_star(want)), 1e-14);
      }
    }
}

TEST(QForms, StarQMatchesHodgeStarOnCurvedMetric) {
  const int n = 5;
  const auto f = make_family("random_af", n, {{"amplitude", 0.4}, {"tau", 1.0}});
  const std::vector<double> x{1.0, 2.0, -1.0, 0.5, 1.5};
  const auto b = make_bundle(f, x, {2});
  const Frame fr = build_frame(b, adapted_spec_at(x));
  const auto q = q_and_star_q(b, fr, curvature_two_forms(b, fr), 2);
  double scale = 0.0;
  for (const auto& w : q.q.f) scale = std::max(scale, w.max_abs());
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c)
      EXPECT_LT(max_diff(q.star_q(a, c), hodge_star(q.q(a, c))), 1e-12 * scale);
}

TEST(Quadrature, MomentsOnSpheres) {
  for (int n = 2; n <= 6; ++n) {
    const SphereQuadrature quad(n, 6);
    const double area = unit_sphere_area(n);
    auto integrate = [&](auto f) {
      double s = 0.0;
      for (std::size_t q = 0; q < quad.size(); ++q) s += quad.weights[q] * f(quad.node(q));
      return s;
    };
    EXPECT_NEAR(integrate([](auto) { return 1.0; }), area, 1e-12 * area);
    EXPECT_NEAR(integrate([](auto u) { return u[0]; }), 0.0, 1e-13);
    EXPECT_NEAR(integrate([n](auto u) { return u[n - 1] * u[n - 1]; }), area / n, 1e-12 * area);
    // <x1^4> = 3 area / (n (n + 2))
    EXPECT_NEAR(integrate([](auto u) { return std::pow(u[0], 4); }), 3.0 * area / (n * (n + 2.0)), 1e-12 * area);
    for (double w : quad.weights) EXPECT_GT(w, 0.0);
    EXPECT_NEAR(integrate_sphere([](std::span<const double>) { return 1.0; }, quad, 2.0), area * std::pow(2.0, n - 1),
                1e-11 * area * std::pow(2.0, n - 1));
  }
  EXPECT_NEAR(unit_sphere_area(3), 4.0 * M_PI, 1e-14);
  EXPECT_NEAR(unit_sphere_area(4), 2.0 * M_PI * M_PI, 1e-14);
  EXPECT_THROW(SphereQuadrature(1, 4), ContractViolation);
}
