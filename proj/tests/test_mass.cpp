#include <gtest/gtest.h>

#include <cmath>

#include "gbc/mass.hpp"

using namespace gbc;

TEST(Extrapolate, PowerLawLimit) {
  const auto r = geometric_radii(10.0, 2.0, 6);
  std::vector<double> v;
  for (double x : r) v.push_back(3.0 + 5.0 * std::pow(x, -2.0));
  const auto e = extrapolate(r, v);
  EXPECT_NEAR(e.limit, 3.0, 1e-10);
  EXPECT_NEAR(e.exponent, 2.0, 1e-6);
  EXPECT_NEAR(e.amplitude, 5.0, 1e-4);
  EXPECT_TRUE(e.converged);
}

TEST(Extrapolate, TwoTermModel) {
  const auto r = geometric_radii(5.0, 1.5, 8);
  std::vector<double> v;
  for (double x : r) v.push_back(-1.0 + 2.0 * std::pow(x, -1.5) + 4.0 * std::pow(x, -2.5));
  ExtrapolationOptions o;
  o.two_term = true;
  EXPECT_NEAR(extrapolate(r, v, o).limit, -1.0, 1e-9);
}

TEST(Extrapolate, LadderIsExactForLadderData) {
  const auto r = geometric_radii(10.0, 2.0, 6);
  std::vector<double> v;
  for (double x : r) v.push_back(0.25 + 3.0 * std::pow(x, -0.2) - 7.0 * std::pow(x, -0.8) + std::pow(x, -1.4));
  ExtrapolationOptions o;
  o.exponents = {0.2, 0.8, 1.4};
  const auto e = extrapolate(r, v, o);
  EXPECT_NEAR(e.limit, 0.25, 1e-9);
  EXPECT_NEAR(e.amplitude, 3.0, 1e-8);
  EXPECT_LT(e.residual, 1e-12);
}

TEST(Extrapolate, ConstantDataIsUnresolved) {
  const auto r = geometric_radii(10.0, 2.0, 5);
  const std::vector<double> v(5, 1.5);
  const auto e = extrapolate(r, v);
  EXPECT_TRUE(e.p_unresolved);
  EXPECT_EQ(e.limit, 1.5);
}

TEST(Extrapolate, Contracts) {
  const std::vector<double> r{1, 2, 3}, v{1, 2, 3};
  EXPECT_THROW(extrapolate(r, v), ContractViolation);
  const std::vector<double> r4{1, 3, 2, 4}, v4{1, 2, 3, 4};
  EXPECT_THROW(extrapolate(r4, v4), ContractViolation);
  const std::vector<double> r5{1, 2, 3, 4}, v5{1, 2, NAN, 4};
  EXPECT_THROW(extrapolate(r5, v5), GeometryError);
  EXPECT_THROW(geometric_radii(1.0, 1.0, 4), ContractViolation);
}

TEST(Ladder, ExponentsAndThreshold) {
  const auto p = exponent_ladder(5, 2, 0.6, 3);
  ASSERT_EQ(p.size(), 3u);
  EXPECT_NEAR(p[0], 0.2, 1e-12);
  EXPECT_NEAR(p[1], 0.8, 1e-12);
  EXPECT_NEAR(p[2], 1.4, 1e-12);
  // Non-positive entries are dropped: n = 3, k = 1, tau = 1 gives 0, 1, 2.
  const auto q = exponent_ladder(3, 1, 1.0, 2);
  ASSERT_EQ(q.size(), 2u);
  EXPECT_NEAR(q[0], 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(decay_threshold(5, 2), 1.0 / 3.0);
}

TEST(Compare, DiscrepancyRule) {
  EXPECT_TRUE(compare_masses(1.0, 1.009).pass);
  EXPECT_FALSE(compare_masses(1.0, 1.02).pass);
  EXPECT_TRUE(compare_masses(0.0, 9e-4).pass);
  EXPECT_FALSE(compare_masses(0.0, 2e-3).pass);
  EXPECT_NEAR(compare_masses(2.0, 1.0).relative, 0.5, 1e-15);
}

TEST(Masses, FlatSpaceIsZero) {
  for (auto [n, k] : {std::pair{4, 1}, std::pair{5, 2}}) {
    const auto f = make_family("flat", n);
    const SphereQuadrature quad(n, 2);
    const auto r = geometric_radii(10.0, 2.0, 4);
    const auto rep = mass_all(f, k, quad, r);
    for (const auto& [name, fit] : rep.fit) EXPECT_LT(std::abs(fit.limit), 1e-10) << name;
  }
}

TEST(Masses, AdmPartialsMatchClosedForm) {
  // g = psi^4 delta, psi = 1 + m/(2r): the flux through S_r is m psi(r)^3.
  const double m = 0.7;
  const auto f = make_family("schwarzschild_isotropic", 3, {{"m", m}});
  const SphereQuadrature quad(3, 4);
  for (double r : {2.0, 10.0, 100.0}) {
    const auto pm = partial_masses(f, 1, quad, r);
    EXPECT_NEAR(pm[3], m * std::pow(1.0 + m / (2.0 * r), 3), 1e-12) << r;
  }
}

TEST(Masses, SchwarzschildLimitsAgree) {
  const auto f = make_family("schwarzschild_isotropic", 3, {{"m", 1.0}});
  const SphereQuadrature quad(3, 4);
  const auto r = geometric_radii(10.0, 2.0, 6);
  const auto rep = mass_all(f, 1, quad, r);
  for (const char* name : {"gbc", "intrinsic", "chern", "adm", "omega_starq"})
    EXPECT_NEAR(rep.fit.at(name).limit, 1.0, 5e-3) << name;
  for (const auto& [name, d] : rep.discrepancies) EXPECT_TRUE(d.pass) << name;
  EXPECT_TRUE(rep.warnings.empty());
  EXPECT_EQ(rep.partial.at("gbc").size(), 6u);
}

TEST(Masses, OmegaStarQIsTwiceTheFlux) {
  const int n = 4;
  const auto f = make_family("schwarzschild_isotropic", n, {{"m", 1.0}});
  const SphereQuadrature quad(n, 4);
  const double r = 400.0;
  const double raw_q = integrate_sphere([&](auto x) { return omega_starq_integrand(f, 1, x); }, quad, r);
  const double raw_p = integrate_sphere([&](auto x) { return gbc_integrand(f, 1, x); }, quad, r);
  EXPECT_NEAR(raw_q / raw_p, 2.0, 1e-2);
}

TEST(Masses, LowDecayWarns) {
  const auto f = make_family("conformal_radial", 5, {{"q", 0.3}});
  const SphereQuadrature quad(5, 0);
  const auto rep = mass_all(f, 2, quad, geometric_radii(10.0, 2.0, 4));
  ASSERT_FALSE(rep.warnings.empty());
  EXPECT_NE(rep.warnings.front().find("threshold"), std::string::npos);
}

TEST(Masses, Contracts) {
  const auto f = make_family("flat", 4);
  const SphereQuadrature quad(4, 2), wrong(3, 2);
  const auto r = geometric_radii(10.0, 2.0, 4);
  EXPECT_THROW(mass_all(f, 2, quad, r), ContractViolation);
  EXPECT_THROW(mass_all(f, 1, wrong, r), ContractViolation);
  EXPECT_THROW(mass_all(f, 1, quad, geometric_radii(10.0, 2.0, 3)), ContractViolation);
  EXPECT_THROW(mass_all(make_family("constant_curvature", 4), 1, quad, r), ContractViolation);
}
