#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "gbc/curvature.hpp"
#include "gbc/forms.hpp"
#include "gbc/linalg.hpp"
#include "gbc/metric.hpp"
#include "gbc/tensor.hpp"

namespace gbc {

enum class FrameKind : std::uint8_t {
  adapted,     ///< e_n = nu (unit metric gradient of r), rest completed by Gram-Schmidt
  coordinate,  ///< Gram-Schmidt of d_1, ..., d_n in index order
};

/// Everything that must stay fixed while a frame field is sampled on a
/// finite-difference stencil.
struct FrameSpec {
  FrameKind kind = FrameKind::adapted;
  /// Adapted frames complete nu with the constant vectors d_m, m != dropped.
  int dropped_anchor = -1;
};

/// The anchor dropped is the coordinate direction closest to the radial one,
/// which keeps the remaining n-1 anchors well away from nu.
inline FrameSpec adapted_spec_at(std::span<const double> point) {
  FrameSpec s;
  s.kind = FrameKind::adapted;
  int best = 0;
  for (int m = 1; m < static_cast<int>(point.size()); ++m)
    if (std::abs(point[m]) > std::abs(point[best])) best = m;
  s.dropped_anchor = best;
  return s;
}

inline FrameSpec coordinate_spec() { return FrameSpec{FrameKind::coordinate, -1}; }

/// Orthonormal frame with exact first derivatives. 0-based legs; for adapted
/// frames leg n-1 is the outward normal.
struct Frame {
  int dim = 0;
  FrameSpec spec;
  std::vector<double> point;
  Matrix e;                ///< e(a, i) = e_a^i
  Matrix theta;            ///< theta(a, i) = g_ij e_a^j, the dual coframe
  std::vector<double> de;  ///< de[(c*n + a)*n + i] = d_c e_a^i
  DenseTensor conn;        ///< conn(a, b, c) = omega_ab(e_c) = g(nabla_{e_c} e_a, e_b)

  double d(int c, int a, int i) const {
    return de[(static_cast<std::size_t>(c) * dim + a) * dim + i];
  }
  /// Second fundamental form of the coordinate sphere, h(i, j) = omega_{jn}(e_i).
  Matrix shape() const {
    if (spec.kind != FrameKind::adapted) throw ContractViolation("shape needs an adapted frame");
    Matrix h(dim - 1);
    for (int i = 0; i < dim - 1; ++i)
      for (int j = 0; j < dim - 1; ++j) h(i, j) = conn(j, dim - 1, i);
    return h;
  }
  double orthonormality_residual(const Matrix& g) const {
    double worst = 0.0;
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) {
        double v = 0.0;
        for (int i = 0; i < dim; ++i)
          for (int j = 0; j < dim; ++j) v += g(i, j) * e(a, i) * e(b, j);
        worst = std::max(worst, std::abs(v - (a == b ? 1.0 : 0.0)));
      }
    return worst;
  }
};

namespace detail {

struct SeedVector {
  std::vector<double> u;   // components
  std::vector<double> du;  // du[c*n + i] = d_c u^i
};

// Gram-Schmidt in the metric g with the product rule carried through.
inline void gram_schmidt(const MetricSample& s, const std::vector<SeedVector>& seeds, Matrix& e,
                         std::vector<double>& de) {
  const int n = s.dim;
  const std::size_t nn = static_cast<std::size_t>(n);
  e = Matrix(n);
  de.assign(nn * nn * nn, 0.0);
  auto g = [&](std::span<const double> a, std::span<const double> b) {
    double v = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v += s.metric(i, j) * a[i] * b[j];
    return v;
  };
  auto dg = [&](int c, std::span<const double> a, std::span<const double> b) {
    double v = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v += s.d1(c, i, j) * a[i] * b[j];
    return v;
  };
  std::vector<std::vector<double>> legs(nn), dlegs(nn);  // dlegs[a][c*n+i]
  for (int a = 0; a < n; ++a) {
    const SeedVector& sv = seeds[static_cast<std::size_t>(a)];
    std::vector<double> w = sv.u, dw = sv.du;
    for (int b = 0; b < a; ++b) {
      const auto& eb = legs[b];
      const double p = g(sv.u, eb);
      for (int i = 0; i < n; ++i) w[i] -= p * eb[i];
      for (int c = 0; c < n; ++c) {
        std::span<const double> duc(sv.du.data() + c * nn, nn), debc(dlegs[b].data() + c * nn, nn);
        const double dp = dg(c, sv.u, eb) + g(duc, eb) + g(sv.u, debc);
        for (int i = 0; i < n; ++i) dw[c * nn + i] -= dp * eb[i] + p * debc[i];
      }
    }
    const double norm2 = g(w, w);
    if (!(norm2 > 1e-20)) throw GeometryError("frame seed vectors are linearly dependent");
    const double norm = std::sqrt(norm2);
    std::vector<double> ea(nn), dea(nn * nn);
    for (int i = 0; i < n; ++i) ea[i] = w[i] / norm;
    for (int c = 0; c < n; ++c) {
      std::span<const double> dwc(dw.data() + c * nn, nn);
      const double dn2 = dg(c, w, w) + 2.0 * g(dwc, w);
      for (int i = 0; i < n; ++i)
        dea[c * nn + i] = dwc[i] / norm - w[i] * dn2 / (2.0 * norm2 * norm);
    }
    legs[a] = std::move(ea);
    dlegs[a] = std::move(dea);
  }
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i) {
      e(a, i) = legs[a][i];
      for (int c = 0; c < n; ++c) de[(c * nn + a) * nn + i] = dlegs[a][c * nn + i];
    }
}

}  // namespace detail

/// Builds the frame at `point`. `ginv` and `gamma` are those of `s`.
inline Frame build_frame(const MetricSample& s, const Matrix& ginv, const DenseTensor& gamma,
                         std::span<const double> point, const FrameSpec& spec) {
  const int n = s.dim;
  const std::size_t nn = static_cast<std::size_t>(n);
  Frame f;
  f.dim = n;
  f.spec = spec;
  f.point.assign(point.begin(), point.end());

  std::vector<detail::SeedVector> seeds;
  if (spec.kind == FrameKind::coordinate) {
    for (int a = 0; a < n; ++a) {
      detail::SeedVector sv{std::vector<double>(nn, 0.0), std::vector<double>(nn * nn, 0.0)};
      sv.u[a] = 1.0;
      seeds.push_back(std::move(sv));
    }
  } else {
    double r2 = 0.0;
    for (double v : point) r2 += v * v;
    const double r = std::sqrt(r2);
    if (r == 0.0) throw GeometryError("adapted frame requested at the chart origin");
    if (spec.dropped_anchor < 0 || spec.dropped_anchor >= n)
      throw ContractViolation("adapted frame spec has no valid dropped anchor");
    // G^i = g^{ij} x_j / r and its derivative.
    detail::SeedVector grad{std::vector<double>(nn, 0.0), std::vector<double>(nn * nn, 0.0)};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) grad.u[i] += ginv(i, j) * point[j] / r;
    for (int c = 0; c < n; ++c) {
      // d_c g^{ij} = -g^{ia} d_c g_ab g^{bj}
      std::vector<double> tmp(nn, 0.0);  // d_c g_ab G^b
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) tmp[a] += s.d1(c, a, b) * grad.u[b];
      for (int i = 0; i < n; ++i) {
        double v = ginv(i, c) / r;
        for (int a = 0; a < n; ++a) v -= ginv(i, a) * tmp[a];
        v -= grad.u[i] * point[c] / r2;
        grad.du[c * nn + i] = v;
      }
    }
    seeds.push_back(std::move(grad));
    for (int m = 0; m < n; ++m) {
      if (m == spec.dropped_anchor) continue;
      detail::SeedVector sv{std::vector<double>(nn, 0.0), std::vector<double>(nn * nn, 0.0)};
      sv.u[m] = 1.0;
      seeds.push_back(std::move(sv));
    }
  }

  Matrix e;
  std::vector<double> de;
  detail::gram_schmidt(s, seeds, e, de);
  if (spec.kind == FrameKind::adapted) {
    // Move nu to the last slot, keep the rest in order.
    Matrix e2(n);
    std::vector<double> de2(de.size());
    for (int a = 0; a < n; ++a) {
      const int src = (a == n - 1) ? 0 : a + 1;
      for (int i = 0; i < n; ++i) {
        e2(a, i) = e(src, i);
        for (int c = 0; c < n; ++c) de2[(c * nn + a) * nn + i] = de[(c * nn + src) * nn + i];
      }
    }
    e = std::move(e2);
    de = std::move(de2);
    if (determinant(e) < 0.0) {
      for (int i = 0; i < n; ++i) {
        e(0, i) = -e(0, i);
        for (int c = 0; c < n; ++c) de[(c * nn) * nn + i] = -de[(c * nn) * nn + i];
      }
    }
  }
  f.e = e;
  f.de = std::move(de);
  f.theta = Matrix(n);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i) {
      double v = 0.0;
      for (int j = 0; j < n; ++j) v += s.metric(i, j) * e(a, j);
      f.theta(a, i) = v;
    }

  // conn(a, b, c) = e_c^k theta_b,i (d_k e_a^i + Gamma^i_{km} e_a^m)
  std::vector<double> nabla(nn * nn * nn);  // nabla[(a*n + k)*n + i] = (nabla_k e_a)^i
  for (int a = 0; a < n; ++a)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) {
        double v = f.d(k, a, i);
        for (int m = 0; m < n; ++m) v += gamma(i, k, m) * e(a, m);
        nabla[(a * nn + k) * nn + i] = v;
      }
  f.conn = DenseTensor(n, {Variance::lower, Variance::lower, Variance::lower});
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double vab = 0.0, vba = 0.0;
        for (int k = 0; k < n; ++k) {
          const double ek = e(c, k);
          if (ek == 0.0) continue;
          for (int i = 0; i < n; ++i) {
            vab += ek * f.theta(b, i) * nabla[(a * nn + k) * nn + i];
            vba += ek * f.theta(a, i) * nabla[(b * nn + k) * nn + i];
          }
        }
        const double v = (a == b) ? 0.0 : 0.5 * (vab - vba);
        f.conn(a, b, c) = v;
        f.conn(b, a, c) = -v;
      }
  return f;
}

inline Frame build_frame(const CurvatureBundle& b, const FrameSpec& spec) {
  return build_frame(b.sample, b.ginv, b.gamma, b.point, spec);
}

/// Adapted frame with the anchor choice made at `point` itself.
inline Frame build_adapted_frame(const MetricFamily& family, std::span<const double> point) {
  const MetricSample s = family.eval(point);
  const Matrix ginv = spd_inverse(s.metric_matrix());
  return build_frame(s, ginv, christoffel(s, ginv), point, adapted_spec_at(point));
}

/// out(a,b,c,d) = M(a,i) M(b,j) M(c,k) M(d,l) t(i,j,k,l).
inline DenseTensor transform_rank4(const DenseTensor& t, const Matrix& m) {
  const int n = t.dim();
  const std::size_t nn = static_cast<std::size_t>(n);
  std::vector<double> cur(t.components().begin(), t.components().end()), next(cur.size());
  std::size_t stride = nn * nn * nn;
  for (int slot = 0; slot < 4; ++slot) {
    std::fill(next.begin(), next.end(), 0.0);
    const std::size_t block = stride * nn;
    for (std::size_t outer = 0; outer < cur.size(); outer += block)
      for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i) {
          const double w = m(a, i);
          if (w == 0.0) continue;
          for (std::size_t inner = 0; inner < stride; ++inner)
            next[outer + a * stride + inner] += w * cur[outer + i * stride + inner];
        }
    std::swap(cur, next);
    stride /= nn;
  }
  return DenseTensor(n, t.variance(), std::move(cur), t.declared_symmetry());
}

/// Square table of forms indexed by two frame legs.
struct FormTable {
  int n = 0;
  std::vector<DifferentialForm> f;
  const DifferentialForm& operator()(int a, int b) const { return f[static_cast<std::size_t>(a) * n + b]; }
  DifferentialForm& operator()(int a, int b) { return f[static_cast<std::size_t>(a) * n + b]; }
};

/// Connection 1-forms omega_ab = conn(a, b, c) theta^c in the frame coframe.
inline FormTable connection_forms(const Frame& fr) {
  const int n = fr.dim;
  FormTable t{n, std::vector<DifferentialForm>(static_cast<std::size_t>(n) * n)};
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      DifferentialForm w(n, 1);
      for (int c = 0; c < n; ++c) w.coeffs()[c] = fr.conn(a, b, c);
      t(a, b) = std::move(w);
    }
  return t;
}

enum class CurvatureSign : std::uint8_t {
  riemann,    ///< Omega_ab = 1/2 R_ab^cd theta_c ^ theta_d
  structure,  ///< Omega_ab(X, Y) = g(R(X, Y) e_a, e_b), so d omega = Omega + omega ^ omega
};

/// Frame components R_abcd of the Riemann tensor.
inline DenseTensor frame_riemann(const CurvatureBundle& b, const Frame& fr) {
  return transform_rank4(b.riemann_low, fr.e);
}

/// Curvature 2-forms in the frame coframe. The two sign layouts differ by an
/// overall minus sign.
inline FormTable curvature_two_forms(const CurvatureBundle& b, const Frame& fr,
                                     CurvatureSign sign = CurvatureSign::riemann) {
  const int n = fr.dim;
  const DenseTensor rf = frame_riemann(b, fr);
  const double s = (sign == CurvatureSign::riemann) ? 1.0 : -1.0;
  FormTable t{n, std::vector<DifferentialForm>(static_cast<std::size_t>(n) * n)};
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      DifferentialForm w(n, 2);
      for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q)
          w.at_mask((std::uint32_t{1} << p) | (std::uint32_t{1} << q)) = s * rf(a, c, p, q);
      t(a, c) = std::move(w);
    }
  return t;
}

namespace detail {

inline int sequence_sign(std::span<const int> seq) {
  int inv = 0;
  for (std::size_t i = 0; i < seq.size(); ++i)
    for (std::size_t j = i + 1; j < seq.size(); ++j)
      if (seq[i] > seq[j]) ++inv;
  return (inv & 1) ? -1 : 1;
}

// Calls visit(sign, pairs, rest) for every sequence of `count` increasing
// pairs drawn from `pool` (bitmask over legs), where rest is the sorted
// remainder and sign = sgn(prefix, pairs..., rest) as a permutation of the
// sorted (prefix u pool).
template <typename Visit>
void for_pair_sequences(std::span<const int> prefix, std::uint32_t pool, int count, Visit&& visit) {
  std::vector<int> pairs;
  auto rec = [&](auto&& self, std::uint32_t avail, int left) -> void {
    if (left == 0) {
      std::vector<int> seq(prefix.begin(), prefix.end());
      seq.insert(seq.end(), pairs.begin(), pairs.end());
      std::vector<int> rest;
      for (std::uint32_t t = avail; t; t &= t - 1) rest.push_back(std::countr_zero(t));
      seq.insert(seq.end(), rest.begin(), rest.end());
      visit(sequence_sign(seq), std::span<const int>(pairs), std::span<const int>(rest));
      return;
    }
    for (std::uint32_t ti = avail; ti; ti &= ti - 1) {
      const int i = std::countr_zero(ti);
      for (std::uint32_t tj = avail & ~((std::uint32_t{2} << i) - 1); tj; tj &= tj - 1) {
        const int j = std::countr_zero(tj);
        pairs.push_back(i);
        pairs.push_back(j);
        self(self, avail & ~(std::uint32_t{1} << i) & ~(std::uint32_t{1} << j), left - 1);
        pairs.pop_back();
        pairs.pop_back();
      }
    }
  };
  rec(rec, pool, count);
}

inline DifferentialForm wedge_all(int n, std::span<const DifferentialForm* const> parts) {
  DifferentialForm acc = DifferentialForm::scalar(n, 1.0);
  for (const DifferentialForm* p : parts) acc = wedge(acc, *p);
  return acc;
}

inline std::uint32_t low_mask(int m) { return (std::uint32_t{1} << m) - 1; }

}  // namespace detail

/// Phi_k = eps^{a_1..a_{n-1}} Omega_{a1a2} ^..^ Omega ^ omega_{a_{2k+1} n} ^..^ omega_{a_{n-1} n},
/// legs a_i running over the tangential legs of an adapted frame. Valid for
/// 0 <= 2k <= n-1.
inline DifferentialForm chern_phi(int k, const FormTable& omega, const FormTable& curv) {
  const int n = omega.n;
  if (k < 0 || 2 * k > n - 1) throw ContractViolation("Phi_k needs 0 <= 2k <= n-1");
  DifferentialForm out(n, n - 1);
  const double mult = factorial(n - 1 - 2 * k) * std::pow(2.0, k);
  std::vector<const DifferentialForm*> parts;
  detail::for_pair_sequences({}, detail::low_mask(n - 1), k,
                             [&](int sign, std::span<const int> pairs, std::span<const int> rest) {
                               parts.clear();
                               for (std::size_t p = 0; p < pairs.size(); p += 2)
                                 parts.push_back(&curv(pairs[p], pairs[p + 1]));
                               for (int r : rest) parts.push_back(&omega(r, n - 1));
                               out.axpy(sign * mult, detail::wedge_all(n, parts));
                             });
  return out;
}

/// Psi_k = 2(k+1) eps^{a_1..a_{n-1}} Omega..Omega ^ Omega_{a_{2k+1} n} ^ omega_{a_{2k+2} n} ^ ...
/// Psi_{-1} is the zero n-form. Valid for -1 <= k, 2k+2 <= n.
inline DifferentialForm chern_psi(int k, const FormTable& omega, const FormTable& curv) {
  const int n = omega.n;
  if (k < -1 || 2 * k + 2 > n) throw ContractViolation("Psi_k needs -1 <= k and 2k+2 <= n");
  DifferentialForm out(n, n);
  if (k == -1) return out;
  const double mult = 2.0 * (k + 1) * factorial(n - 2 * k - 2) * std::pow(2.0, k);
  std::vector<const DifferentialForm*> parts;
  detail::for_pair_sequences(
      {}, detail::low_mask(n - 1), k, [&](int, std::span<const int> pairs, std::span<const int> rest) {
        for (std::size_t si = 0; si < rest.size(); ++si) {
          std::vector<int> seq(pairs.begin(), pairs.end());
          seq.push_back(rest[si]);
          for (std::size_t r = 0; r < rest.size(); ++r)
            if (r != si) seq.push_back(rest[r]);
          const int sign = detail::sequence_sign(seq);
          parts.clear();
          for (std::size_t p = 0; p < pairs.size(); p += 2) parts.push_back(&curv(pairs[p], pairs[p + 1]));
          parts.push_back(&curv(rest[si], n - 1));
          for (std::size_t r = 0; r < rest.size(); ++r)
            if (r != si) parts.push_back(&omega(rest[r], n - 1));
          out.axpy(sign * mult, detail::wedge_all(n, parts));
        }
      });
  return out;
}

/// Pi = (-1)^{n/2-1} sum_k (-1)^k (n/2-k-1)! (n/2)! / ((n-2k-1)! k! 2^{2k-n+1}) Phi_k, n even.
inline DifferentialForm transgression_pi(const FormTable& omega, const FormTable& curv) {
  const int n = omega.n;
  if (n % 2 != 0) throw ContractViolation("the transgression form needs even n");
  const int h = n / 2;
  DifferentialForm out(n, n - 1);
  for (int k = 0; k <= h - 1; ++k) {
    const double c = ((h - 1 + k) % 2 == 0 ? 1.0 : -1.0) * factorial(h - k - 1) * factorial(h) /
                     (factorial(n - 2 * k - 1) * factorial(k) * std::pow(2.0, 2 * k - n + 1));
    out.axpy(c, chern_phi(k, omega, curv));
  }
  return out;
}

/// L_k *1 = 1/(n-2k)! eps^{a_1..a_n} Omega_{a1a2} ^..^ Omega ^ theta_{a_{2k+1}} ^..^ theta_{a_n}.
inline DifferentialForm lk_volume_form(int k, const FormTable& curv) {
  const int n = curv.n;
  if (k < 1 || 2 * k > n) throw ContractViolation("L_k volume form needs 1 <= k, 2k <= n");
  DifferentialForm out(n, n);
  std::vector<DifferentialForm> theta;
  for (int a = 0; a < n; ++a) theta.push_back(DifferentialForm::basis_one_form(n, a));
  const double mult = std::pow(2.0, k);
  std::vector<const DifferentialForm*> parts;
  detail::for_pair_sequences({}, detail::low_mask(n), k,
                             [&](int sign, std::span<const int> pairs, std::span<const int> rest) {
                               parts.clear();
                               for (std::size_t p = 0; p < pairs.size(); p += 2)
                                 parts.push_back(&curv(pairs[p], pairs[p + 1]));
                               for (int r : rest) parts.push_back(&theta[r]);
                               out.axpy(sign * mult, detail::wedge_all(n, parts));
                             });
  return out;
}

struct QForms {
  FormTable q;       ///< Q^{ab} = P^{abcd} theta_c ^ theta_d
  FormTable star_q;  ///< *Q^{ab} from the curvature-product formula
};

/// Q^{ab} and *Q^{ab} at the bundle point in the frame `fr`; `curv` must be
/// the Riemann-sign curvature forms in the same frame.
inline QForms q_and_star_q(const CurvatureBundle& b, const Frame& fr, const FormTable& curv, int k) {
  check_order(b.dim, k);
  const int n = b.dim;
  const auto it = b.p_tensor.find(k);
  const DenseTensor pt = (it != b.p_tensor.end()) ? it->second : p_tensor(b, k);
  const DenseTensor pf = transform_rank4(pt, fr.theta);
  QForms out{{n, std::vector<DifferentialForm>(static_cast<std::size_t>(n) * n)},
             {n, std::vector<DifferentialForm>(static_cast<std::size_t>(n) * n)}};
  std::vector<DifferentialForm> theta;
  for (int a = 0; a < n; ++a) theta.push_back(DifferentialForm::basis_one_form(n, a));
  const double mult = std::pow(2.0, k - 1);
  std::vector<const DifferentialForm*> parts;
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      DifferentialForm q(n, 2);
      for (int p = 0; p < n; ++p)
        for (int r = p + 1; r < n; ++r)
          q.at_mask((std::uint32_t{1} << p) | (std::uint32_t{1} << r)) = 2.0 * pf(a, c, p, r);
      out.q(a, c) = std::move(q);
      DifferentialForm sq(n, n - 2);
      if (a != c) {
        const std::array<int, 2> prefix{a, c};
        const std::uint32_t pool = detail::low_mask(n) & ~(std::uint32_t{1} << a) & ~(std::uint32_t{1} << c);
        detail::for_pair_sequences(prefix, pool, k - 1,
                                   [&](int sign, std::span<const int> pairs, std::span<const int> rest) {
                                     parts.clear();
                                     for (std::size_t p = 0; p < pairs.size(); p += 2)
                                       parts.push_back(&curv(pairs[p], pairs[p + 1]));
                                     for (int r : rest) parts.push_back(&theta[r]);
                                     sq.axpy(sign * mult, detail::wedge_all(n, parts));
                                   });
      }
      out.star_q(a, c) = std::move(sq);
    }
  return out;
}

/// sum_{a,b} omega_{ba} ^ *Q^{ab}, in the frame coframe.
inline DifferentialForm omega_wedge_star_q(const FormTable& omega, const QForms& q) {
  const int n = omega.n;
  DifferentialForm out(n, n - 1);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b) out += wedge(omega(b, a), q.star_q(a, b));
  return out;
}

/// A frame-coframe form re-expressed in dx^i.
inline DifferentialForm to_coordinates(const DifferentialForm& f, const Frame& fr) {
  return change_coframe(f, fr.theta);
}

}  // namespace gbc
