#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gbc/linalg.hpp"

namespace gbc {

inline constexpr int kMaxFormDim = 10;

namespace detail {

// Increasing multi-indices of length p in {0..n-1}, lexicographic order, as
// bitmasks, plus the inverse lookup mask -> position.
struct MultiIndexTable {
  std::vector<std::uint32_t> masks;
  std::vector<int> position;  // size 2^n, -1 for masks of other lengths
};

inline const MultiIndexTable& multi_index_table(int n, int p) {
  static const auto tables = [] {
    std::array<std::array<MultiIndexTable, kMaxFormDim + 1>, kMaxFormDim + 1> t{};
    for (int dim = 1; dim <= kMaxFormDim; ++dim)
      for (int deg = 0; deg <= dim; ++deg) {
        MultiIndexTable& tab = t[dim][deg];
        tab.position.assign(std::size_t{1} << dim, -1);
        // Lexicographic enumeration of increasing tuples.
        std::vector<int> idx(static_cast<std::size_t>(deg));
        for (int i = 0; i < deg; ++i) idx[i] = i;
        while (true) {
          std::uint32_t m = 0;
          for (int v : idx) m |= std::uint32_t{1} << v;
          tab.position[m] = static_cast<int>(tab.masks.size());
          tab.masks.push_back(m);
          int i = deg - 1;
          while (i >= 0 && idx[i] == dim - deg + i) --i;
          if (i < 0) break;
          ++idx[i];
          for (int j = i + 1; j < deg; ++j) idx[j] = idx[j - 1] + 1;
        }
      }
    return t;
  }();
  if (n < 1 || n > kMaxFormDim || p < 0 || p > n)
    throw ContractViolation("form dimension or degree out of range");
  return tables[n][p];
}

// Sign of theta_A ^ theta_B relative to theta_{A|B} (A, B disjoint).
inline int merge_sign(std::uint32_t a, std::uint32_t b) {
  int swaps = 0;
  while (b) {
    const int j = std::countr_zero(b);
    b &= b - 1;
    swaps += std::popcount(a >> (j + 1));
  }
  return (swaps & 1) ? -1 : 1;
}

}  // namespace detail

/// Alternating p-form at a point: coefficients over increasing multi-indices
/// (lexicographic) with respect to whichever coframe the caller is using.
class DifferentialForm {
 public:
  DifferentialForm() = default;
  DifferentialForm(int dim, int degree)
      : dim_(dim), degree_(degree), coeffs_(detail::multi_index_table(dim, degree).masks.size(), 0.0) {}

  /// The basis 1-form theta^i (0-based i).
  static DifferentialForm basis_one_form(int dim, int i) {
    DifferentialForm f(dim, 1);
    f.coeffs_[static_cast<std::size_t>(i)] = 1.0;
    return f;
  }
  static DifferentialForm one_form(std::span<const double> c) {
    DifferentialForm f(static_cast<int>(c.size()), 1);
    std::copy(c.begin(), c.end(), f.coeffs_.begin());
    return f;
  }
  static DifferentialForm scalar(int dim, double v) {
    DifferentialForm f(dim, 0);
    f.coeffs_[0] = v;
    return f;
  }

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  std::span<const double> coeffs() const { return coeffs_; }
  std::span<double> coeffs() { return coeffs_; }
  const std::vector<std::uint32_t>& masks() const {
    return detail::multi_index_table(dim_, degree_).masks;
  }

  double& at_mask(std::uint32_t m) { return coeffs_[index_of(m)]; }
  double at_mask(std::uint32_t m) const { return coeffs_[index_of(m)]; }

  /// Coefficient for an increasing 0-based multi-index.
  double coeff(std::initializer_list<int> idx) const {
    std::uint32_t m = 0;
    for (int i : idx) m |= std::uint32_t{1} << i;
    return at_mask(m);
  }

  /// Coefficient of the top-degree form theta^1 ^ ... ^ theta^n.
  double top() const {
    if (degree_ != dim_) throw ContractViolation("top() needs an n-form");
    return coeffs_[0];
  }

  double max_abs() const {
    double m = 0.0;
    for (double c : coeffs_) m = std::max(m, std::abs(c));
    return m;
  }

  DifferentialForm& operator+=(const DifferentialForm& o) {
    check_same(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }
  DifferentialForm& operator-=(const DifferentialForm& o) {
    check_same(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
  }
  DifferentialForm& operator*=(double s) {
    for (double& c : coeffs_) c *= s;
    return *this;
  }
  /// this += s * o
  void axpy(double s, const DifferentialForm& o) {
    check_same(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += s * o.coeffs_[i];
  }
  friend DifferentialForm operator+(DifferentialForm a, const DifferentialForm& b) { return a += b; }
  friend DifferentialForm operator-(DifferentialForm a, const DifferentialForm& b) { return a -= b; }
  friend DifferentialForm operator*(double s, DifferentialForm a) { return a *= s; }

 private:
  std::size_t index_of(std::uint32_t m) const {
    const int p = detail::multi_index_table(dim_, degree_).position[m];
    if (p < 0) throw ContractViolation("multi-index does not match the form degree");
    return static_cast<std::size_t>(p);
  }
  void check_same(const DifferentialForm& o) const {
    if (o.dim_ != dim_ || o.degree_ != degree_)
      throw ContractViolation("forms of different dimension or degree");
  }

  int dim_ = 0;
  int degree_ = 0;
  std::vector<double> coeffs_;
};

inline DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
  if (a.dim() != b.dim()) throw ContractViolation("wedge of forms of different dimension");
  const int n = a.dim();
  const int p = a.degree() + b.degree();
  if (p > n) throw ContractViolation("wedge degree exceeds the dimension");
  DifferentialForm out(n, p);
  const auto& ma = a.masks();
  const auto& mb = b.masks();
  const auto ca = a.coeffs();
  const auto cb = b.coeffs();
  for (std::size_t i = 0; i < ma.size(); ++i) {
    if (ca[i] == 0.0) continue;
    for (std::size_t j = 0; j < mb.size(); ++j) {
      if (cb[j] == 0.0 || (ma[i] & mb[j])) continue;
      out.at_mask(ma[i] | mb[j]) += detail::merge_sign(ma[i], mb[j]) * ca[i] * cb[j];
    }
  }
  return out;
}

template <typename... Rest>
DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b, const Rest&... rest) {
  return wedge(wedge(a, b), rest...);
}

/// Hodge star in an oriented orthonormal coframe: (*b)_{A^c} = sgn(A, A^c) b_A.
inline DifferentialForm hodge_star(const DifferentialForm& b) {
  const int n = b.dim();
  const std::uint32_t full = (n == 32) ? ~0u : ((std::uint32_t{1} << n) - 1);
  DifferentialForm out(n, n - b.degree());
  const auto& m = b.masks();
  for (std::size_t i = 0; i < m.size(); ++i)
    out.at_mask(full & ~m[i]) = detail::merge_sign(m[i], full & ~m[i]) * b.coeffs()[i];
  return out;
}

namespace detail {

inline double small_det(std::array<double, kMaxFormDim * kMaxFormDim>& a, int p) {
  double det = 1.0;
  for (int c = 0; c < p; ++c) {
    int piv = c;
    for (int r = c + 1; r < p; ++r)
      if (std::abs(a[r * p + c]) > std::abs(a[piv * p + c])) piv = r;
    if (a[piv * p + c] == 0.0) return 0.0;
    if (piv != c) {
      for (int j = 0; j < p; ++j) std::swap(a[c * p + j], a[piv * p + j]);
      det = -det;
    }
    det *= a[c * p + c];
    for (int r = c + 1; r < p; ++r) {
      const double f = a[r * p + c] / a[c * p + c];
      for (int j = c; j < p; ++j) a[r * p + j] -= f * a[c * p + j];
    }
  }
  return det;
}

}  // namespace detail

/// Re-expresses a form given in a coframe theta^a = C(a, i) dx^i in the
/// coordinate coframe: b_B = sum_A b_A det C[A, B].
inline DifferentialForm change_coframe(const DifferentialForm& b, const Matrix& c) {
  const int n = b.dim();
  if (c.size() != n) throw ContractViolation("coframe matrix has wrong size");
  const int p = b.degree();
  DifferentialForm out(n, p);
  if (p == 0) {
    out.coeffs()[0] = b.coeffs()[0];
    return out;
  }
  const auto& m = b.masks();
  std::array<int, kMaxFormDim> rows{}, cols{};
  std::array<double, kMaxFormDim * kMaxFormDim> minor{};
  for (std::size_t ia = 0; ia < m.size(); ++ia) {
    const double v = b.coeffs()[ia];
    if (v == 0.0) continue;
    int q = 0;
    for (std::uint32_t t = m[ia]; t; t &= t - 1) rows[q++] = std::countr_zero(t);
    for (std::size_t ib = 0; ib < m.size(); ++ib) {
      q = 0;
      for (std::uint32_t t = m[ib]; t; t &= t - 1) cols[q++] = std::countr_zero(t);
      for (int r = 0; r < p; ++r)
        for (int s = 0; s < p; ++s) minor[r * p + s] = c(rows[r], cols[s]);
      out.coeffs()[ib] += v * detail::small_det(minor, p);
    }
  }
  return out;
}

/// Oriented flux density of a coordinate (n-1)-form through a hypersurface
/// with Euclidean unit normal N: the form equals sum_i b^i i_{d_i}(dx^1..dx^n)
/// with b^i = (-1)^i b_{[n]\i} (0-based), and its integral is int b.N dsigma.
inline double flux_density(const DifferentialForm& b, std::span<const double> normal) {
  const int n = b.dim();
  if (b.degree() != n - 1) throw ContractViolation("flux needs an (n-1)-form");
  const std::uint32_t full = (std::uint32_t{1} << n) - 1;
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    s += ((i & 1) ? -1.0 : 1.0) * b.at_mask(full & ~(std::uint32_t{1} << i)) * normal[i];
  return s;
}

using FormField = std::function<DifferentialForm(std::span<const double>)>;

namespace detail {

inline std::span<const double> central_weights(int order) {
  static const double w2[] = {0.5};
  static const double w4[] = {2.0 / 3.0, -1.0 / 12.0};
  static const double w6[] = {3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
  switch (order) {
    case 2: return w2;
    case 4: return w4;
    case 6: return w6;
    default: throw ContractViolation("finite-difference order must be 2, 4 or 6");
  }
}

}  // namespace detail

/// d b = sum_c dx^c ^ d_c b, with d_c from a central stencil of the given
/// order. The field must return coefficients in the coordinate coframe.
inline DifferentialForm exterior_derivative_fd(const FormField& field, std::span<const double> point,
                                               double step, int order = 2) {
  if (!(step > 0.0)) throw ContractViolation("finite-difference step must be positive");
  const auto w = detail::central_weights(order);
  const int n = static_cast<int>(point.size());
  std::vector<double> x(point.begin(), point.end());
  DifferentialForm out;
  for (int c = 0; c < n; ++c) {
    DifferentialForm deriv;
    for (std::size_t s = 0; s < w.size(); ++s) {
      const double off = static_cast<double>(s + 1) * step;
      x[c] = point[c] + off;
      DifferentialForm fp = field(x);
      x[c] = point[c] - off;
      const DifferentialForm fm = field(x);
      x[c] = point[c];
      fp -= fm;
      fp *= w[s] / step;
      if (s == 0)
        deriv = std::move(fp);
      else
        deriv += fp;
    }
    DifferentialForm term = wedge(DifferentialForm::basis_one_form(n, c), deriv);
    if (c == 0)
      out = std::move(term);
    else
      out += term;
  }
  return out;
}

}  // namespace gbc
