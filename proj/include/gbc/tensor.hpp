#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gbc/linalg.hpp"

namespace gbc {

enum class Variance : std::uint8_t { upper, lower };

/// Algebraic symmetry a tensor claims to have. Only the Riemann-type
/// symmetry (antisymmetric pairs, pair exchange) is ever declared.
enum class DeclaredSymmetry : std::uint8_t { none, riemann };

/// Rank-r array of components at one chart point, row-major by slot order.
/// Indices are 0-based here; the CLI and reports use 1-based indices.
class DenseTensor {
 public:
  DenseTensor() = default;

  DenseTensor(int dim, std::vector<Variance> variance,
              DeclaredSymmetry symmetry = DeclaredSymmetry::none)
      : dim_(dim), variance_(std::move(variance)), symmetry_(symmetry) {
    if (dim <= 0) throw ContractViolation("tensor dimension must be positive");
    components_.assign(ipow(dim_, rank()), 0.0);
  }

  DenseTensor(int dim, std::vector<Variance> variance, std::vector<double> components,
              DeclaredSymmetry symmetry = DeclaredSymmetry::none)
      : dim_(dim),
        variance_(std::move(variance)),
        components_(std::move(components)),
        symmetry_(symmetry) {
    if (dim <= 0) throw ContractViolation("tensor dimension must be positive");
    if (components_.size() != ipow(dim_, rank()))
      throw ContractViolation("component count must equal dim^rank");
  }

  int dim() const { return dim_; }
  int rank() const { return static_cast<int>(variance_.size()); }
  const std::vector<Variance>& variance() const { return variance_; }
  DeclaredSymmetry declared_symmetry() const { return symmetry_; }

  std::span<const double> components() const { return components_; }
  std::span<double> components() { return components_; }

  std::size_t offset(std::span<const int> idx) const {
    std::size_t off = 0;
    for (int i : idx) off = off * dim_ + static_cast<std::size_t>(i);
    return off;
  }

  template <typename... I>
  double& operator()(I... idx) {
    const std::array<int, sizeof...(I)> a{static_cast<int>(idx)...};
    return components_[offset(a)];
  }
  template <typename... I>
  double operator()(I... idx) const {
    const std::array<int, sizeof...(I)> a{static_cast<int>(idx)...};
    return components_[offset(a)];
  }
  double& at(std::span<const int> idx) { return components_[offset(idx)]; }
  double at(std::span<const int> idx) const { return components_[offset(idx)]; }

  double max_abs() const {
    double m = 0.0;
    for (double c : components_) m = std::max(m, std::abs(c));
    return m;
  }

  /// Largest violation of the declared symmetry, relative to max |component|.
  /// Zero when nothing is declared.
  double symmetry_residual() const {
    if (symmetry_ != DeclaredSymmetry::riemann) return 0.0;
    const double scale = std::max(max_abs(), 1e-300);
    double worst = 0.0;
    const auto& t = *this;
    for (int a = 0; a < dim_; ++a)
      for (int b = 0; b < dim_; ++b)
        for (int c = 0; c < dim_; ++c)
          for (int d = 0; d < dim_; ++d) {
            const double v = t(a, b, c, d);
            worst = std::max({worst, std::abs(v + t(b, a, c, d)), std::abs(v + t(a, b, d, c)),
                              std::abs(v - t(c, d, a, b))});
          }
    return worst / scale;
  }

  static std::size_t ipow(int base, int exp) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
    return r;
  }

 private:
  int dim_ = 0;
  std::vector<Variance> variance_;
  std::vector<double> components_;
  DeclaredSymmetry symmetry_ = DeclaredSymmetry::none;
};

using IndexTuple = std::vector<int>;

/// Generalized Kronecker delta: det[delta(upper_a, lower_b)]. Equals the sign
/// of the permutation taking `lower` to `upper` when both list the same
/// distinct indices, and 0 otherwise.
inline int gen_delta(std::span<const int> upper, std::span<const int> lower) {
  if (upper.size() != lower.size())
    throw ContractViolation("generalized delta needs index tuples of equal length");
  const std::size_t r = upper.size();
  std::vector<int> pos(r);
  for (std::size_t b = 0; b < r; ++b) {
    int found = -1;
    for (std::size_t a = 0; a < r; ++a) {
      if (upper[a] == lower[b]) {
        if (found >= 0) return 0;  // repeated upper entry
        found = static_cast<int>(a);
      }
    }
    if (found < 0) return 0;
    pos[b] = found;
  }
  for (std::size_t b = 0; b < r; ++b)
    for (std::size_t c = b + 1; c < r; ++c)
      if (pos[b] == pos[c]) return 0;  // repeated lower entry
  int inversions = 0;
  for (std::size_t b = 0; b < r; ++b)
    for (std::size_t c = b + 1; c < r; ++c)
      if (pos[b] > pos[c]) ++inversions;
  return (inversions % 2 == 0) ? 1 : -1;
}

inline int gen_delta(std::initializer_list<int> upper, std::initializer_list<int> lower) {
  return gen_delta(std::span<const int>(upper.begin(), upper.size()),
                   std::span<const int>(lower.begin(), lower.size()));
}

namespace detail {

// Evaluates sum_{I,J} delta^{I U}_{J V} prod_a F_a{}_{I_{2a} I_{2a+1}}^{J_{2a} J_{2a+1}}
// over increasing pairs, using the antisymmetry of every factor in both of
// its index pairs (each restricted pair stands for two orderings).
class AntisymKernel {
 public:
  AntisymKernel(int n, std::span<const double* const> factors, std::span<const int> upper,
                std::span<const int> lower)
      : n_(n), factors_(factors), upper_(upper), lower_(lower) {
    kf_ = static_cast<int>(factors.size());
    row_.assign(2 * kf_ + upper.size(), 0);
    lower_row_.assign(2 * kf_ + lower.size(), 0);
  }

  double evaluate() {
    if (upper_.size() != lower_.size()) return 0.0;
    upper_mask_ = 0;
    for (int u : upper_) {
      if (upper_mask_ & bit(u)) return 0.0;
      upper_mask_ |= bit(u);
    }
    lower_mask_ = 0;
    for (int v : lower_) {
      if (lower_mask_ & bit(v)) return 0.0;
      lower_mask_ |= bit(v);
    }
    for (std::size_t i = 0; i < upper_.size(); ++i) row_[2 * kf_ + i] = upper_[i];
    for (std::size_t i = 0; i < lower_.size(); ++i) lower_row_[2 * kf_ + i] = lower_[i];
    sum_ = 0.0;
    choose_upper(0, upper_mask_);
    double mult = 1.0;
    for (int a = 0; a < kf_; ++a) mult *= 4.0;
    return sum_ * mult;
  }

 private:
  static std::uint32_t bit(int i) { return std::uint32_t{1} << i; }

  void choose_upper(int a, std::uint32_t used) {
    if (a == kf_) {
      if ((lower_mask_ & ~used) != 0) return;  // some free lower index unmatched
      choose_lower(0, used & ~lower_mask_, 1.0);
      return;
    }
    for (int i = 0; i < n_; ++i) {
      if (used & bit(i)) continue;
      for (int j = i + 1; j < n_; ++j) {
        if (used & bit(j)) continue;
        row_[2 * a] = i;
        row_[2 * a + 1] = j;
        choose_upper(a + 1, used | bit(i) | bit(j));
      }
    }
  }

  void choose_lower(int a, std::uint32_t avail, double product) {
    if (a == kf_) {
      sum_ += permutation_sign() * product;
      return;
    }
    const double* f = factors_[a];
    const std::size_t n = static_cast<std::size_t>(n_);
    const std::size_t base =
        (static_cast<std::size_t>(row_[2 * a]) * n + static_cast<std::size_t>(row_[2 * a + 1])) *
        n * n;
    for (int i = 0; i < n_; ++i) {
      if (!(avail & bit(i))) continue;
      for (int j = i + 1; j < n_; ++j) {
        if (!(avail & bit(j))) continue;
        const double v = f[base + static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)];
        if (v == 0.0) continue;
        lower_row_[2 * a] = i;
        lower_row_[2 * a + 1] = j;
        choose_lower(a + 1, avail & ~bit(i) & ~bit(j), product * v);
      }
    }
  }

  double permutation_sign() const {
    const std::size_t r = row_.size();
    std::array<int, 32> pos{};
    for (std::size_t p = 0; p < r; ++p) pos[static_cast<std::size_t>(row_[p])] = static_cast<int>(p);
    int inversions = 0;
    for (std::size_t b = 0; b < r; ++b)
      for (std::size_t c = b + 1; c < r; ++c)
        if (pos[static_cast<std::size_t>(lower_row_[b])] > pos[static_cast<std::size_t>(lower_row_[c])])
          ++inversions;
    return (inversions % 2 == 0) ? 1.0 : -1.0;
  }

  int n_;
  int kf_ = 0;
  std::span<const double* const> factors_;
  std::span<const int> upper_;
  std::span<const int> lower_;
  std::uint32_t upper_mask_ = 0;
  std::uint32_t lower_mask_ = 0;
  std::vector<int> row_;
  std::vector<int> lower_row_;
  double sum_ = 0.0;
};

}  // namespace detail

/// Full generalized-delta-weighted contraction
///   sum_{I,J} delta^{I U}_{J V} F_1{}_{I1 I2}^{J1 J2} ... F_k{}_{..}^{..}
/// with the free upper indices U and lower indices V held fixed. Each factor
/// is a rank-(2,2) tensor stored as F_{ab}^{cd}. No 1/2^k prefactor applied.
inline double antisym_contract(std::span<const DenseTensor* const> factors,
                               std::span<const int> free_upper, std::span<const int> free_lower) {
  if (free_upper.size() != free_lower.size())
    throw ContractViolation("free upper and lower index counts differ");
  if (factors.empty() && free_upper.empty())
    throw ContractViolation("empty contraction requested (L_0 is not defined here)");
  const int n = factors.empty() ? 0 : factors.front()->dim();
  std::vector<const double*> raw;
  raw.reserve(factors.size());
  for (const DenseTensor* f : factors) {
    if (f->rank() != 4 || f->dim() != n)
      throw ContractViolation("contraction factors must be rank-4 tensors of one dimension");
    raw.push_back(f->components().data());
  }
  const std::size_t total = 2 * factors.size() + free_upper.size();
  if (!factors.empty() && total > static_cast<std::size_t>(n)) return 0.0;
  if (factors.empty()) return gen_delta(free_upper, free_lower);
  detail::AntisymKernel kernel(n, raw, free_upper, free_lower);
  return kernel.evaluate();
}

/// Convenience form: k copies of the same factor.
inline double antisym_contract_power(const DenseTensor& factor, int copies,
                                     std::span<const int> free_upper,
                                     std::span<const int> free_lower) {
  std::vector<const DenseTensor*> f(static_cast<std::size_t>(copies), &factor);
  return antisym_contract(f, free_upper, free_lower);
}

/// Raises (lower slot) or lowers (upper slot) one index with g^{-1} or g.
inline DenseTensor raise_lower(const DenseTensor& t, int slot, const DenseTensor& metric,
                               const DenseTensor& inverse_metric) {
  const int n = t.dim();
  if (slot < 0 || slot >= t.rank()) throw ContractViolation("slot out of range");
  if (metric.rank() != 2 || inverse_metric.rank() != 2 || metric.dim() != n)
    throw ContractViolation("metric must be a rank-2 tensor of matching dimension");
  Matrix gm(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gm(i, j) = metric(i, j);
  (void)cholesky(gm);  // throws GeometryError unless SPD

  const bool raising = t.variance()[static_cast<std::size_t>(slot)] == Variance::lower;
  const DenseTensor& m = raising ? inverse_metric : metric;
  auto variance = t.variance();
  variance[static_cast<std::size_t>(slot)] = raising ? Variance::upper : Variance::lower;
  DenseTensor out(n, variance);

  const std::size_t stride = DenseTensor::ipow(n, t.rank() - slot - 1);
  const std::size_t block = stride * static_cast<std::size_t>(n);
  const auto src = t.components();
  auto dst = out.components();
  for (std::size_t outer = 0; outer < src.size(); outer += block)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const double mab = m(a, b);
        if (mab == 0.0) continue;
        for (std::size_t inner = 0; inner < stride; ++inner)
          dst[outer + static_cast<std::size_t>(a) * stride + inner] +=
              mab * src[outer + static_cast<std::size_t>(b) * stride + inner];
      }
  return out;
}

}  // namespace gbc
