#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gbc/linalg.hpp"

namespace gbc {

/// Metric components and their exact coordinate derivatives at one point.
///   g[i*n+j]            = g_ij
///   dg[(k*n+i)*n+j]     = d_k g_ij
///   d2g[((k*n+l)*n+i)*n+j] = d_k d_l g_ij
struct MetricSample {
  int dim = 0;
  std::vector<double> g;
  std::vector<double> dg;
  std::vector<double> d2g;

  explicit MetricSample(int n = 0)
      : dim(n),
        g(static_cast<std::size_t>(n) * n, 0.0),
        dg(static_cast<std::size_t>(n) * n * n, 0.0),
        d2g(static_cast<std::size_t>(n) * n * n * n, 0.0) {}

  double metric(int i, int j) const { return g[idx2(i, j)]; }
  double d1(int k, int i, int j) const { return dg[idx3(k, i, j)]; }
  double d2(int k, int l, int i, int j) const { return d2g[idx4(k, l, i, j)]; }

  std::size_t idx2(int i, int j) const { return static_cast<std::size_t>(i * dim + j); }
  std::size_t idx3(int k, int i, int j) const {
    return static_cast<std::size_t>((k * dim + i) * dim + j);
  }
  std::size_t idx4(int k, int l, int i, int j) const {
    return static_cast<std::size_t>(((k * dim + l) * dim + i) * dim + j);
  }

  Matrix metric_matrix() const {
    Matrix m(dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m(i, j) = metric(i, j);
    return m;
  }
};

using ParamMap = std::map<std::string, double>;

namespace detail {

class MetricImpl {
 public:
  virtual ~MetricImpl() = default;
  virtual MetricSample eval(std::span<const double> x) const = 0;
};

/// Profile phi(s), s = |x|^2, with its first two s-derivatives.
struct RadialProfile {
  double f;
  double fs;
  double fss;
};

/// g = phi(|x|^2) delta. Derivatives are taken in s = |x|^2 so the formulas
/// stay regular at the origin (needed by the compact constant-curvature model).
class ConformalRadial final : public MetricImpl {
 public:
  ConformalRadial(int n, std::function<RadialProfile(double)> profile)
      : n_(n), profile_(std::move(profile)) {}

  MetricSample eval(std::span<const double> x) const override {
    MetricSample out(n_);
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
    const RadialProfile p = profile_(s);
    for (int i = 0; i < n_; ++i) out.g[out.idx2(i, i)] = p.f;
    for (int k = 0; k < n_; ++k) {
      const double xk = x[static_cast<std::size_t>(k)];
      const double dk = 2.0 * xk * p.fs;
      for (int i = 0; i < n_; ++i) out.dg[out.idx3(k, i, i)] = dk;
      for (int l = 0; l < n_; ++l) {
        const double xl = x[static_cast<std::size_t>(l)];
        const double dkl = (k == l ? 2.0 * p.fs : 0.0) + 4.0 * xk * xl * p.fss;
        for (int i = 0; i < n_; ++i) out.d2g[out.idx4(k, l, i, i)] = dkl;
      }
    }
    return out;
  }

 private:
  int n_;
  std::function<RadialProfile(double)> profile_;
};

/// g = delta + amplitude * r^{-tau} * S(x/r) with
///   S(u) = A + B_l u_l + C_lm u_l u_m,
/// written as a sum of (polynomial in x) * r^{-s} terms so every derivative
/// follows from the product rule.
class RandomAF final : public MetricImpl {
 public:
  RandomAF(int n, double amplitude, double tau, std::uint64_t seed)
      : n_(n), amplitude_(amplitude), tau_(tau) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const std::size_t nn = static_cast<std::size_t>(n);
    a_.assign(nn * nn, 0.0);
    b_.assign(nn * nn * nn, 0.0);
    c_.assign(nn * nn * nn * nn, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const double v = unit(rng);
        a_[i * nn + j] = v;
        a_[j * nn + i] = v;
        for (int l = 0; l < n; ++l) {
          const double w = unit(rng) / n;
          b_[(i * nn + j) * nn + l] = w;
          b_[(j * nn + i) * nn + l] = w;
        }
        for (int l = 0; l < n; ++l)
          for (int m = l; m < n; ++m) {
            const double w = unit(rng) / n;
            c_[((i * nn + j) * nn + l) * nn + m] = w;
            c_[((i * nn + j) * nn + m) * nn + l] = w;
            c_[((j * nn + i) * nn + l) * nn + m] = w;
            c_[((j * nn + i) * nn + m) * nn + l] = w;
          }
      }
  }

  MetricSample eval(std::span<const double> x) const override {
    const int n = n_;
    const std::size_t nn = static_cast<std::size_t>(n);
    MetricSample out(n);
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) r2 += x[i] * x[i];
    const double r = std::sqrt(r2);
    if (r == 0.0) throw GeometryError("random_af metric evaluated at the origin");
    std::vector<double> u(nn);
    for (int i = 0; i < n; ++i) u[i] = x[i] / r;

    // Radial factors h(r) = r^{-s} for s = tau, tau+1, tau+2.
    struct Radial {
      double h, h1, h2;
    };
    auto radial = [&](double s) {
      const double h = std::pow(r, -s);
      return Radial{h, -s * h / r, s * (s + 1.0) * h / r2};
    };
    const Radial h0 = radial(tau_), h1 = radial(tau_ + 1.0), h2 = radial(tau_ + 2.0);

    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        // Polynomials P0 = A_ij, P1 = B_ijl x_l, P2 = C_ijlm x_l x_m and
        // their gradients / Hessians.
        const double p0 = a_[i * nn + j];
        double p1 = 0.0, p2 = 0.0;
        std::vector<double> gp1(nn), gp2(nn, 0.0), hp2(nn * nn);
        for (int l = 0; l < n; ++l) {
          gp1[l] = b_[(i * nn + j) * nn + l];
          p1 += gp1[l] * x[l];
          for (int m = 0; m < n; ++m) {
            const double c = c_[((i * nn + j) * nn + l) * nn + m];
            p2 += c * x[l] * x[m];
            gp2[l] += 2.0 * c * x[m];
            hp2[l * nn + m] = 2.0 * c;
          }
        }
        const double value = p0 * h0.h + p1 * h1.h + p2 * h2.h;
        out.g[out.idx2(i, j)] = (i == j ? 1.0 : 0.0) + amplitude_ * value;
        for (int k = 0; k < n; ++k) {
          const double dk = p0 * h0.h1 * u[k] + gp1[k] * h1.h + p1 * h1.h1 * u[k] +
                            gp2[k] * h2.h + p2 * h2.h1 * u[k];
          out.dg[out.idx3(k, i, j)] = amplitude_ * dk;
          for (int l = 0; l < n; ++l) {
            const double dul = ((k == l ? 1.0 : 0.0) - u[k] * u[l]) / r;  // d_l u_k
            auto second = [&](double p, double gk, double gl, double hkl, const Radial& h) {
              return hkl * h.h + (gk * u[l] + gl * u[k]) * h.h1 + p * (h.h2 * u[k] * u[l] + h.h1 * dul);
            };
            const double dkl = second(p0, 0.0, 0.0, 0.0, h0) + second(p1, gp1[k], gp1[l], 0.0, h1) +
                               second(p2, gp2[k], gp2[l], hp2[k * nn + l], h2);
            out.d2g[out.idx4(k, l, i, j)] = amplitude_ * dkl;
          }
        }
      }
    return out;
  }

 private:
  int n_;
  double amplitude_;
  double tau_;
  std::vector<double> a_, b_, c_;
};

/// Pullback of a metric under the linear chart change x = R y (R orthogonal).
class Rotated final : public MetricImpl {
 public:
  Rotated(std::shared_ptr<const MetricImpl> base, Matrix rotation)
      : base_(std::move(base)), rot_(std::move(rotation)) {}

  MetricSample eval(std::span<const double> y) const override {
    const int n = rot_.size();
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < n; ++a) x[i] += rot_(i, a) * y[a];
    const MetricSample s = base_->eval(x);
    MetricSample out(n);
    // Contract every slot with R: T'_{a..} = R_{ia} ... T_{i..}.
    auto transform = [&](std::span<const double> in, std::span<double> dst, int rank) {
      std::vector<double> cur(in.begin(), in.end()), next(cur.size());
      const std::size_t nn = static_cast<std::size_t>(n);
      std::size_t stride = 1;
      for (int slot = 0; slot < rank; ++slot) {
        std::fill(next.begin(), next.end(), 0.0);
        const std::size_t block = stride * nn;
        for (std::size_t outer = 0; outer < cur.size(); outer += block)
          for (int a = 0; a < n; ++a)
            for (int i = 0; i < n; ++i) {
              const double r = rot_(i, a);
              if (r == 0.0) continue;
              for (std::size_t inner = 0; inner < stride; ++inner)
                next[outer + a * stride + inner] += r * cur[outer + i * stride + inner];
            }
        std::swap(cur, next);
        stride *= nn;
      }
      std::copy(cur.begin(), cur.end(), dst.begin());
    };
    transform(s.g, out.g, 2);
    transform(s.dg, out.dg, 3);
    transform(s.d2g, out.d2g, 4);
    return out;
  }

 private:
  std::shared_ptr<const MetricImpl> base_;
  Matrix rot_;
};

}  // namespace detail

/// A named analytic metric on the asymptotic chart R^n \ B_R with exact first
/// and second derivatives.
class MetricFamily {
 public:
  MetricFamily(std::string name, int dim, ParamMap params, std::optional<double> decay_tau,
               std::shared_ptr<const detail::MetricImpl> impl)
      : name_(std::move(name)),
        dim_(dim),
        params_(std::move(params)),
        tau_(decay_tau),
        impl_(std::move(impl)) {}

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  const ParamMap& params() const { return params_; }
  /// Declared decay order; empty for the compact constant-curvature model.
  std::optional<double> decay_tau() const { return tau_; }
  bool asymptotically_flat() const { return tau_.has_value(); }

  MetricSample eval(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_) throw ContractViolation("point has wrong dimension");
    return impl_->eval(x);
  }

  /// Same geometry in the rotated chart x = R y.
  MetricFamily rotated(const Matrix& rotation) const {
    if (rotation.size() != dim_) throw ContractViolation("rotation has wrong dimension");
    return MetricFamily(name_, dim_, params_, tau_,
                        std::make_shared<detail::Rotated>(impl_, rotation));
  }

 private:
  std::string name_;
  int dim_;
  ParamMap params_;
  std::optional<double> tau_;
  std::shared_ptr<const detail::MetricImpl> impl_;
};

inline const std::vector<std::string>& family_names() {
  static const std::vector<std::string> names = {"flat", "schwarzschild_isotropic",
                                                 "conformal_radial", "random_af",
                                                 "constant_curvature"};
  return names;
}

inline double param_or(const ParamMap& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

/// Builds one of the analytic families. Recognised parameters (defaults):
///   schwarzschild_isotropic: m (1)
///   conformal_radial: p (1), c (1), q (1)      g = (1 + c r^{-q})^p delta
///   random_af: amplitude (0.1), tau (n-2), seed (0)
///   constant_curvature: kappa (1)              g = 4 (1 + kappa |x|^2)^{-2} delta
inline MetricFamily make_family(const std::string& name, int dim, const ParamMap& params = {}) {
  if (dim < 2) throw ContractViolation("metric dimension must be at least 2");
  auto allow = [&](std::initializer_list<const char*> keys) {
    for (const auto& [key, value] : params) {
      bool ok = false;
      for (const char* k : keys) ok = ok || key == k;
      if (!ok) throw ContractViolation("unknown parameter '" + key + "' for family " + name);
    }
  };
  const double n = dim;
  if (name == "flat") {
    allow({});
    auto profile = [](double) { return detail::RadialProfile{1.0, 0.0, 0.0}; };
    // Flat space decays at every order; report a large nominal tau.
    return MetricFamily(name, dim, params, 1e6,
                        std::make_shared<detail::ConformalRadial>(dim, profile));
  }
  if (name == "schwarzschild_isotropic") {
    allow({"m"});
    if (dim < 3) throw ContractViolation("schwarzschild_isotropic needs n >= 3");
    const double m = param_or(params, "m", 1.0);
    ParamMap p = params;
    p["m"] = m;
    const double a = 4.0 / (n - 2.0);
    const double e = 0.5 * (n - 2.0);  // r^{n-2} = s^e
    auto profile = [m, a, e](double s) {
      const double w = 1.0 + 0.5 * m * std::pow(s, -e);
      const double ws = -0.5 * m * e * std::pow(s, -e - 1.0);
      const double wss = 0.5 * m * e * (e + 1.0) * std::pow(s, -e - 2.0);
      const double f = std::pow(w, a);
      return detail::RadialProfile{f, a * std::pow(w, a - 1.0) * ws,
                                   a * (a - 1.0) * std::pow(w, a - 2.0) * ws * ws +
                                       a * std::pow(w, a - 1.0) * wss};
    };
    return MetricFamily(name, dim, p, n - 2.0,
                        std::make_shared<detail::ConformalRadial>(dim, profile));
  }
  if (name == "conformal_radial") {
    allow({"p", "c", "q"});
    const double pw = param_or(params, "p", 1.0);
    const double c = param_or(params, "c", 1.0);
    const double q = param_or(params, "q", 1.0);
    if (!(q > 0.0)) throw ContractViolation("conformal_radial needs q > 0");
    ParamMap p = params;
    p["p"] = pw;
    p["c"] = c;
    p["q"] = q;
    const double e = 0.5 * q;
    auto profile = [pw, c, e](double s) {
      const double w = 1.0 + c * std::pow(s, -e);
      const double ws = -c * e * std::pow(s, -e - 1.0);
      const double wss = c * e * (e + 1.0) * std::pow(s, -e - 2.0);
      return detail::RadialProfile{std::pow(w, pw), pw * std::pow(w, pw - 1.0) * ws,
                                   pw * (pw - 1.0) * std::pow(w, pw - 2.0) * ws * ws +
                                       pw * std::pow(w, pw - 1.0) * wss};
    };
    return MetricFamily(name, dim, p, q, std::make_shared<detail::ConformalRadial>(dim, profile));
  }
  if (name == "random_af") {
    allow({"amplitude", "tau", "seed"});
    const double amp = param_or(params, "amplitude", 0.1);
    const double tau = param_or(params, "tau", n - 2.0);
    const double seed = param_or(params, "seed", 0.0);
    if (!(tau > 0.0)) throw ContractViolation("random_af needs tau > 0");
    ParamMap p = params;
    p["amplitude"] = amp;
    p["tau"] = tau;
    p["seed"] = seed;
    return MetricFamily(
        name, dim, p, tau,
        std::make_shared<detail::RandomAF>(dim, amp, tau, static_cast<std::uint64_t>(seed)));
  }
  if (name == "constant_curvature") {
    allow({"kappa"});
    const double kappa = param_or(params, "kappa", 1.0);
    if (!(kappa > 0.0)) throw ContractViolation("constant_curvature needs kappa > 0");
    ParamMap p = params;
    p["kappa"] = kappa;
    auto profile = [kappa](double s) {
      const double w = 1.0 + kappa * s;
      return detail::RadialProfile{4.0 / (w * w), -8.0 * kappa / (w * w * w),
                                   24.0 * kappa * kappa / (w * w * w * w)};
    };
    return MetricFamily(name, dim, p, std::nullopt,
                        std::make_shared<detail::ConformalRadial>(dim, profile));
  }
  throw ContractViolation("unknown metric family '" + name + "'");
}

/// Maximum deviation of the analytic derivatives from central differences.
struct FdResidual {
  double first = 0.0;   ///< max |dg - central difference of g|
  double second = 0.0;  ///< max |d2g - central difference of dg|
};

inline FdResidual fd_validate(const MetricFamily& family, std::span<const double> point,
                              double step) {
  if (!(step > 0.0)) throw ContractViolation("finite-difference step must be positive");
  const int n = family.dim();
  const MetricSample s = family.eval(point);
  FdResidual res;
  std::vector<double> xp(point.begin(), point.end()), xm(xp);
  for (int k = 0; k < n; ++k) {
    xp[k] = point[k] + step;
    xm[k] = point[k] - step;
    const MetricSample sp = family.eval(xp), sm = family.eval(xm);
    xp[k] = xm[k] = point[k];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double fd = (sp.metric(i, j) - sm.metric(i, j)) / (2.0 * step);
        res.first = std::max(res.first, std::abs(fd - s.d1(k, i, j)));
        for (int l = 0; l < n; ++l) {
          const double fd2 = (sp.d1(l, i, j) - sm.d1(l, i, j)) / (2.0 * step);
          res.second = std::max(res.second, std::abs(fd2 - s.d2(k, l, i, j)));
        }
      }
  }
  return res;
}

/// Sampled constant C in |sigma| + r|d sigma| + r^2|d^2 sigma| <= C r^{-tau}
/// at the given radius (max over `directions` deterministic directions).
inline double decay_constant(const MetricFamily& family, double radius, int directions,
                             std::uint64_t seed = 7) {
  const auto tau = family.decay_tau();
  if (!tau) throw ContractViolation("decay bound is meaningless for a compact model");
  const int n = family.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int d = 0; d < directions; ++d) {
    double norm = 0.0;
    for (auto& v : x) {
      v = normal(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (auto& v : x) v *= radius / norm;
    const MetricSample s = family.eval(x);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        s0 = std::max(s0, std::abs(s.metric(i, j) - (i == j ? 1.0 : 0.0)));
        for (int k = 0; k < n; ++k) {
          s1 = std::max(s1, std::abs(s.d1(k, i, j)));
          for (int l = 0; l < n; ++l) s2 = std::max(s2, std::abs(s.d2(k, l, i, j)));
        }
      }
    worst = std::max(worst, (s0 + radius * s1 + radius * radius * s2) * std::pow(radius, *tau));
  }
  return worst;
}

}  // namespace gbc
