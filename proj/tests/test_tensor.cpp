#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

#include "gbc/tensor.hpp"

using namespace gbc;

namespace {

// det[delta(upper_a, lower_b)] by the Leibniz expansion.
int leibniz_delta(const std::vector<int>& up, const std::vector<int>& lo) {
  const int r = static_cast<int>(up.size());
  std::vector<int> perm(r);
  std::iota(perm.begin(), perm.end(), 0);
  int total = 0;
  do {
    int prod = 1;
    for (int a = 0; a < r && prod; ++a) prod = (up[a] == lo[perm[a]]) ? 1 : 0;
    if (!prod) continue;
    int inv = 0;
    for (int a = 0; a < r; ++a)
      for (int b = a + 1; b < r; ++b) inv += perm[a] > perm[b];
    total += (inv % 2) ? -1 : 1;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

// Random F_{ab}^{cd}, antisymmetric in each pair.
DenseTensor random_pair_antisym(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseTensor t(n, {Variance::lower, Variance::lower, Variance::upper, Variance::upper});
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = c + 1; d < n; ++d) {
          const double v = u(rng);
          t(a, b, c, d) = v;
          t(b, a, c, d) = -v;
          t(a, b, d, c) = -v;
          t(b, a, d, c) = v;
        }
  return t;
}

// sum over all I, J of delta^{I U}_{J V} prod_a F_a, every index running freely.
double naive_contract(const std::vector<const DenseTensor*>& f, const std::vector<int>& up,
                      const std::vector<int>& lo) {
  const int n = f.front()->dim();
  const int m = 2 * static_cast<int>(f.size());
  std::vector<int> idx(2 * m, 0);
  double sum = 0.0;
  while (true) {
    std::vector<int> u(idx.begin(), idx.begin() + m), l(idx.begin() + m, idx.end());
    u.insert(u.end(), up.begin(), up.end());
    l.insert(l.end(), lo.begin(), lo.end());
    const int d = leibniz_delta(u, l);
    if (d != 0) {
      double p = d;
      for (std::size_t a = 0; a < f.size(); ++a)
        p *= (*f[a])(idx[2 * a], idx[2 * a + 1], idx[m + 2 * a], idx[m + 2 * a + 1]);
      sum += p;
    }
    int pos = 0;
    while (pos < 2 * m && ++idx[pos] == n) idx[pos++] = 0;
    if (pos == 2 * m) break;
  }
  return sum;
}

}  // namespace

TEST(GenDelta, MatchesLeibnizDeterminant) {
  std::vector<std::vector<int>> tuples;
  const int n = 4;
  for (int r = 1; r <= 3; ++r) {
    tuples.clear();
    std::vector<int> t(r, 0);
    while (true) {
      tuples.push_back(t);
      int p = 0;
      while (p < r && ++t[p] == n) t[p++] = 0;
      if (p == r) break;
    }
    for (const auto& a : tuples)
      for (const auto& b : tuples) ASSERT_EQ(gen_delta(a, b), leibniz_delta(a, b));
  }
}

TEST(GenDelta, KnownValues) {
  EXPECT_EQ(gen_delta({0, 1}, {0, 1}), 1);
  EXPECT_EQ(gen_delta({0, 1}, {1, 0}), -1);
  EXPECT_EQ(gen_delta({0, 0}, {0, 1}), 0);
  EXPECT_EQ(gen_delta({2, 0, 1}, {0, 1, 2}), 1);
  EXPECT_EQ(gen_delta({}, {}), 1);
  EXPECT_THROW(gen_delta({0, 1}, {0}), ContractViolation);
}

TEST(AntisymContract, MatchesNaiveSumSingleFactor) {
  std::mt19937_64 rng(11);
  for (int n = 2; n <= 5; ++n) {
    const DenseTensor f = random_pair_antisym(n, rng);
    const std::vector<const DenseTensor*> fs{&f};
    EXPECT_NEAR(antisym_contract(fs, {}, {}), naive_contract(fs, {}, {}), 1e-12);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const std::vector<int> up{i}, lo{j};
        ASSERT_NEAR(antisym_contract(fs, up, lo), naive_contract(fs, up, lo), 1e-12) << n << i << j;
      }
  }
}

TEST(AntisymContract, MatchesNaiveSumTwoFactors) {
  std::mt19937_64 rng(12);
  const int n = 4;
  const DenseTensor a = random_pair_antisym(n, rng), b = random_pair_antisym(n, rng);
  const std::vector<const DenseTensor*> fs{&a, &b};
  EXPECT_NEAR(antisym_contract(fs, {}, {}), naive_contract(fs, {}, {}), 1e-11);
  const DenseTensor c = random_pair_antisym(5, rng);
  const std::vector<const DenseTensor*> one{&c};
  const std::vector<int> up{0, 3}, lo{2, 4};
  EXPECT_NEAR(antisym_contract(one, up, lo), naive_contract(one, up, lo), 1e-12);
}

TEST(AntisymContract, TooManyIndicesVanish) {
  std::mt19937_64 rng(13);
  const DenseTensor f = random_pair_antisym(3, rng);
  EXPECT_EQ(antisym_contract_power(f, 2, {}, {}), 0.0);
}

TEST(AntisymContract, NoFactorsGivesDelta) {
  const std::vector<const DenseTensor*> none;
  const std::vector<int> up{1, 2}, lo{2, 1};
  EXPECT_EQ(antisym_contract(none, up, lo), -1.0);
  EXPECT_THROW(antisym_contract(none, {}, {}), ContractViolation);
}

TEST(AntisymContract, UnitSphereCurvatureScalars) {
  // R_ij^ls = delta^ls_ij; the full contraction of k copies is n!/(n-2k)! 2^k.
  for (int n = 2; n <= 6; ++n) {
    DenseTensor r(n, {Variance::lower, Variance::lower, Variance::upper, Variance::upper});
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
          for (int s = 0; s < n; ++s) r(i, j, l, s) = leibniz_delta({l, s}, {i, j});
    for (int k = 1; 2 * k <= n; ++k) {
      double want = std::pow(2.0, k);
      for (int m = n; m > n - 2 * k; --m) want *= m;
      EXPECT_NEAR(antisym_contract_power(r, k, {}, {}), want, 1e-9 * want) << n << " " << k;
    }
  }
}

TEST(DenseTensor, ConstructionContracts) {
  EXPECT_THROW(DenseTensor(0, {Variance::lower}), ContractViolation);
  EXPECT_THROW(DenseTensor(2, {Variance::lower}, std::vector<double>{1.0}), ContractViolation);
  DenseTensor t(3, {Variance::upper, Variance::lower});
  EXPECT_EQ(t.components().size(), 9u);
  t(1, 2) = 4.0;
  EXPECT_EQ(t.components()[5], 4.0);
}

TEST(DenseTensor, SymmetryResidualDetectsBreak) {
  DenseTensor t(3, {Variance::lower, Variance::lower, Variance::lower, Variance::lower},
                DeclaredSymmetry::riemann);
  t(0, 1, 0, 1) = 1.0;
  t(1, 0, 1, 0) = 1.0;
  t(1, 0, 0, 1) = -1.0;
  t(0, 1, 1, 0) = -1.0;
  EXPECT_EQ(t.symmetry_residual(), 0.0);
  t(0, 1, 1, 0) = -0.5;
  EXPECT_GT(t.symmetry_residual(), 0.1);
}

TEST(RaiseLower, RoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 4;
  DenseTensor g(n, {Variance::lower, Variance::lower}), gi(n, {Variance::upper, Variance::upper});
  Matrix a(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = 0.2 * u(rng);
  Matrix gm(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = (i == j) ? 1.0 : 0.0;
      for (int m = 0; m < n; ++m) v += a(m, i) * a(m, j);
      gm(i, j) = v;
    }
  const Matrix inv = spd_inverse(gm);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      g(i, j) = gm(i, j);
      gi(i, j) = inv(i, j);
    }
  DenseTensor t(n, {Variance::lower, Variance::upper, Variance::lower});
  for (double& c : t.components()) c = u(rng);
  const DenseTensor up = raise_lower(t, 0, g, gi);
  EXPECT_EQ(up.variance()[0], Variance::upper);
  const DenseTensor back = raise_lower(up, 0, g, gi);
  for (std::size_t q = 0; q < t.components().size(); ++q)
    EXPECT_NEAR(back.components()[q], t.components()[q], 1e-13);
  // Raising by hand on slot 2.
  const DenseTensor r2 = raise_lower(t, 2, g, gi);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        double v = 0.0;
        for (int m = 0; m < n; ++m) v += inv(l, m) * t(i, j, m);
        EXPECT_NEAR(r2(i, j, l), v, 1e-13);
      }
}

TEST(RaiseLower, RejectsIndefiniteMetric) {
  const int n = 2;
  DenseTensor g(n, {Variance::lower, Variance::lower}), gi(n, {Variance::upper, Variance::upper});
  g(0, 0) = 1.0;
  g(1, 1) = -1.0;
  gi(0, 0) = 1.0;
  gi(1, 1) = -1.0;
  DenseTensor t(n, {Variance::lower});
  EXPECT_THROW(raise_lower(t, 0, g, gi), GeometryError);
  EXPECT_THROW(raise_lower(t, 1, g, gi), ContractViolation);
}
