#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "gbc/linalg.hpp"
#include "gbc/metric.hpp"
#include "gbc/tensor.hpp"

namespace gbc {

/// Christoffel symbols Gamma^i_{jk} (slots: upper, lower, lower).
inline DenseTensor christoffel(const MetricSample& s, const Matrix& ginv) {
  const int n = s.dim;
  DenseTensor gamma(n, {Variance::upper, Variance::lower, Variance::lower});
  std::vector<double> low(static_cast<std::size_t>(n) * n * n);
  for (int m = 0; m < n; ++m)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        const double v = 0.5 * (s.d1(j, m, k) + s.d1(k, m, j) - s.d1(m, j, k));
        low[(m * n + j) * n + k] = v;
        low[(m * n + k) * n + j] = v;
      }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        double v = 0.0;
        for (int m = 0; m < n; ++m) v += ginv(i, m) * low[(m * n + j) * n + k];
        gamma(i, j, k) = v;
        gamma(i, k, j) = v;
      }
  return gamma;
}

inline DenseTensor christoffel(const MetricSample& s) {
  return christoffel(s, spd_inverse(s.metric_matrix()));
}

struct RiemannPair {
  DenseTensor low;    ///< R_{ijls}; R_{ijij} > 0 on round spheres
  DenseTensor mixed;  ///< R_{ij}^{ls} = R_{ijab} g^{al} g^{bs}
};

/// Riemann tensor with R^i_{jls} = d_l G^i_{sj} - d_s G^i_{lj} + G^i_{lm} G^m_{sj}
/// - G^i_{sm} G^m_{lj}, lowered on the first slot. With this layout the
/// unit sphere has R_{ij}^{ls} = delta^{ls}_{ij} and L_1 equals the scalar
/// curvature.
inline RiemannPair riemann(const MetricSample& s, const Matrix& ginv, const DenseTensor& gamma) {
  const int n = s.dim;
  const std::size_t nn = static_cast<std::size_t>(n);
  // Gamma_{bli} = g_{ba} Gamma^a_{li}
  std::vector<double> low(nn * nn * nn);
  for (int b = 0; b < n; ++b)
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        low[(b * nn + l) * nn + i] = 0.5 * (s.d1(l, b, i) + s.d1(i, b, l) - s.d1(b, l, i));

  RiemannPair out{DenseTensor(n, {Variance::lower, Variance::lower, Variance::lower, Variance::lower},
                              DeclaredSymmetry::riemann),
                  DenseTensor(n, {Variance::lower, Variance::lower, Variance::upper, Variance::upper},
                              DeclaredSymmetry::none)};
  DenseTensor& r = out.low;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int l = 0; l < n; ++l)
        for (int q = l + 1; q < n; ++q) {
          // d_l Gamma_{iqj} - d_q Gamma_{ilj}
          double v = 0.5 * (s.d2(l, q, i, j) + s.d2(l, j, i, q) - s.d2(l, i, q, j)) -
                     0.5 * (s.d2(q, l, i, j) + s.d2(q, j, i, l) - s.d2(q, i, l, j));
          for (int b = 0; b < n; ++b)
            v += -low[(b * nn + l) * nn + i] * gamma(b, q, j) + low[(b * nn + q) * nn + i] * gamma(b, l, j);
          r(i, j, l, q) = v;
          r(j, i, l, q) = -v;
          r(i, j, q, l) = -v;
          r(j, i, q, l) = v;
        }
  // Enforce exact pair symmetry R_{ijlq} = R_{lqij} by averaging.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int l = 0; l < n; ++l)
        for (int q = l + 1; q < n; ++q) {
          if (i * n + j >= l * n + q) continue;
          const double v = 0.5 * (r(i, j, l, q) + r(l, q, i, j));
          for (auto [a, b, c, d] : {std::array{i, j, l, q}, std::array{l, q, i, j}}) {
            r(a, b, c, d) = v;
            r(b, a, c, d) = -v;
            r(a, b, d, c) = -v;
            r(b, a, d, c) = v;
          }
        }
  // Mixed form.
  std::vector<double> half(nn * nn * nn * nn, 0.0);  // R_{ijl}^{s}
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l)
        for (int q = 0; q < n; ++q) {
          double v = 0.0;
          for (int b = 0; b < n; ++b) v += r(i, j, l, b) * ginv(b, q);
          half[((i * nn + j) * nn + l) * nn + q] = v;
        }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
          double v = 0.0;
          for (int a = 0; a < n; ++a) v += ginv(p, a) * half[((i * nn + j) * nn + a) * nn + q];
          out.mixed(i, j, p, q) = v;
        }
  return out;
}

inline RiemannPair riemann(const MetricSample& s) {
  const Matrix ginv = spd_inverse(s.metric_matrix());
  return riemann(s, ginv, christoffel(s, ginv));
}

/// Pointwise curvature stack at one chart point.
struct CurvatureBundle {
  int dim = 0;
  std::vector<double> point;
  MetricSample sample;
  Matrix g;
  Matrix ginv;
  DenseTensor gamma;
  DenseTensor riemann_low;
  DenseTensor riemann_mixed;
  DenseTensor ricci;
  double scalar = 0.0;
  std::map<int, double> lk;
  std::map<int, DenseTensor> p_tensor;  ///< P^{ijls}_{(k)}
  std::map<int, DenseTensor> lovelock;  ///< E^{(k)i}_j
};

inline void check_order(int n, int k) {
  if (k < 1) throw ContractViolation("curvature order k must be at least 1");
  if (2 * k >= n) throw ContractViolation("curvature order needs 2k < n");
}

/// L_k; the top order 2k = n (Euler density in even dimension) is allowed.
inline double lk_scalar(const CurvatureBundle& b, int k) {
  if (k < 1) throw ContractViolation("curvature order k must be at least 1");
  if (2 * k > b.dim) throw ContractViolation("L_k needs 2k <= n");
  return antisym_contract_power(b.riemann_mixed, k, {}, {}) / std::pow(2.0, k);
}

/// P^{ijls}_{(k)} = 2^{-k} delta^{I i j}_{J p q} R_I^J ... R_I^J g^{pl} g^{qs}
/// with k-1 curvature factors.
inline DenseTensor p_tensor(const CurvatureBundle& b, int k) {
  check_order(b.dim, k);
  const int n = b.dim;
  DenseTensor t(n, {Variance::upper, Variance::upper, Variance::lower, Variance::lower});
  const double scale = 1.0 / std::pow(2.0, k);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q) {
          const std::array<int, 2> up{i, j}, lo{p, q};
          const double v = scale * antisym_contract_power(b.riemann_mixed, k - 1, up, lo);
          t(i, j, p, q) = v;
          t(j, i, p, q) = -v;
          t(i, j, q, p) = -v;
          t(j, i, q, p) = v;
        }
  DenseTensor pt(n, {Variance::upper, Variance::upper, Variance::upper, Variance::upper},
                 DeclaredSymmetry::riemann);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l)
        for (int s = 0; s < n; ++s) {
          double v = 0.0;
          for (int p = 0; p < n; ++p) {
            const double gpl = b.ginv(p, l);
            if (gpl == 0.0) continue;
            for (int q = 0; q < n; ++q) v += t(i, j, p, q) * gpl * b.ginv(q, s);
          }
          pt(i, j, l, s) = v;
        }
  return pt;
}

/// Lovelock tensor E^{(k)i}_j = -2^{-(k+1)} delta^{i I}_{j J} R_I^J ... ;
/// k = 0 gives the identity (E^{(0)} = g).
inline DenseTensor lovelock_tensor(const CurvatureBundle& b, int k) {
  const int n = b.dim;
  DenseTensor e(n, {Variance::upper, Variance::lower});
  if (k == 0) {
    for (int i = 0; i < n; ++i) e(i, i) = 1.0;
    return e;
  }
  check_order(n, k);
  const double scale = -1.0 / std::pow(2.0, k + 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const std::array<int, 1> up{i}, lo{j};
      e(i, j) = scale * antisym_contract_power(b.riemann_mixed, k, up, lo);
    }
  return e;
}

struct BundleOptions {
  int max_k = 0;          ///< compute L_k, P_(k), E^(k) for min_k <= k <= max_k (2k < n)
  int min_k = 1;
  bool p_tensors = true;
  bool lovelock = true;
};

inline CurvatureBundle make_bundle(const MetricSample& s, std::span<const double> point,
                                   const BundleOptions& opt = {}) {
  CurvatureBundle b;
  b.dim = s.dim;
  b.point.assign(point.begin(), point.end());
  b.sample = s;
  b.g = s.metric_matrix();
  b.ginv = spd_inverse(b.g);
  b.gamma = christoffel(s, b.ginv);
  RiemannPair rp = riemann(s, b.ginv, b.gamma);
  b.riemann_low = std::move(rp.low);
  b.riemann_mixed = std::move(rp.mixed);
  const int n = b.dim;
  b.ricci = DenseTensor(n, {Variance::lower, Variance::lower});
  // Ric_{jl} = g^{ia} R_{ijal}
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      double v = 0.0;
      for (int i = 0; i < n; ++i)
        for (int a = 0; a < n; ++a) v += b.ginv(i, a) * b.riemann_low(i, j, a, l);
      b.ricci(j, l) = v;
    }
  b.scalar = 0.0;
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) b.scalar += b.ginv(j, l) * b.ricci(j, l);
  for (int k = std::max(1, opt.min_k); k <= opt.max_k && 2 * k <= n; ++k) {
    b.lk[k] = lk_scalar(b, k);
    if (2 * k == n) continue;
    if (opt.p_tensors) b.p_tensor[k] = p_tensor(b, k);
    if (opt.lovelock) b.lovelock[k] = lovelock_tensor(b, k);
  }
  return b;
}

inline CurvatureBundle make_bundle(const MetricFamily& family, std::span<const double> point,
                                   const BundleOptions& opt = {}) {
  return make_bundle(family.eval(point), point, opt);
}

/// |Rm|^2 with every slot contracted through g^{-1}.
inline double riemann_norm_sq(const CurvatureBundle& b) {
  const int n = b.dim;
  double s = 0.0;
  // R_{ij}^{ls} R^{ij}_{ls}: raise the first pair of R_{ij}^{ls}.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l)
        for (int q = 0; q < n; ++q) {
          double up = 0.0;
          for (int a = 0; a < n; ++a)
            for (int c = 0; c < n; ++c) up += b.riemann_low(a, c, l, q) * b.ginv(a, i) * b.ginv(c, j);
          s += up * b.riemann_mixed(i, j, l, q);
        }
  return s;
}

inline double ricci_norm_sq(const CurvatureBundle& b) {
  const int n = b.dim;
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c) s += b.ricci(i, j) * b.ricci(a, c) * b.ginv(i, a) * b.ginv(j, c);
  return s;
}

/// E^{(k)}(X, Y) = g_{ia} E^a_j X^i Y^j.
inline double lovelock_bilinear(const CurvatureBundle& b, const DenseTensor& e,
                                std::span<const double> x, std::span<const double> y) {
  const int n = b.dim;
  double v = 0.0;
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < n; ++a) {
      const double gia = b.g(i, a);
      if (gia == 0.0) continue;
      for (int j = 0; j < n; ++j) v += gia * e(a, j) * x[i] * y[j];
    }
  return v;
}

using TensorField = std::function<DenseTensor(std::span<const double>)>;

/// Covariant divergence nabla_c T^{..c..} on an upper `slot`, with partial
/// derivatives from second-order central differences of the field.
inline DenseTensor covariant_divergence(const TensorField& field, const MetricFamily& family,
                                        std::span<const double> point, double step, int slot = 0) {
  if (!(step > 0.0)) throw ContractViolation("finite-difference step must be positive");
  const int n = family.dim();
  const DenseTensor t = field(point);
  const int rank = t.rank();
  if (slot < 0 || slot >= rank || t.variance()[static_cast<std::size_t>(slot)] != Variance::upper)
    throw ContractViolation("divergence slot must be an upper index");
  const DenseTensor gamma = christoffel(family.eval(point));

  std::vector<DenseTensor> partial;  // partial[c] = d_c T
  std::vector<double> xp(point.begin(), point.end()), xm(xp);
  for (int c = 0; c < n; ++c) {
    xp[c] = point[c] + step;
    xm[c] = point[c] - step;
    const DenseTensor tp = field(xp), tm = field(xm);
    xp[c] = xm[c] = point[c];
    DenseTensor d(n, t.variance());
    auto dc = d.components();
    for (std::size_t q = 0; q < dc.size(); ++q)
      dc[q] = (tp.components()[q] - tm.components()[q]) / (2.0 * step);
    partial.push_back(std::move(d));
  }

  std::vector<Variance> out_var;
  for (int s = 0; s < rank; ++s)
    if (s != slot) out_var.push_back(t.variance()[static_cast<std::size_t>(s)]);
  DenseTensor out(n, out_var);
  std::vector<int> idx(static_cast<std::size_t>(rank)), oidx(static_cast<std::size_t>(rank - 1));
  const std::size_t total = out.components().size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int s = rank - 2; s >= 0; --s) {
      oidx[s] = static_cast<int>(rem % n);
      rem /= n;
    }
    double sum = 0.0;
    for (int c = 0; c < n; ++c) {
      for (int s = 0, o = 0; s < rank; ++s) idx[s] = (s == slot) ? c : oidx[o++];
      double v = partial[c].at(idx);
      for (int s = 0; s < rank; ++s) {
        const int a = idx[s];
        for (int m = 0; m < n; ++m) {
          auto j = idx;
          j[s] = m;
          if (t.variance()[static_cast<std::size_t>(s)] == Variance::upper)
            v += gamma(a, c, m) * t.at(j);
          else
            v -= gamma(m, c, a) * t.at(j);
        }
      }
      sum += v;
    }
    out.components()[flat] = sum;
  }
  return out;
}

}  // namespace gbc
