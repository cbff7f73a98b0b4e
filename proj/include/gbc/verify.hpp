#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gbc/curvature.hpp"
#include "gbc/forms.hpp"
#include "gbc/frame.hpp"
#include "gbc/mass.hpp"
#include "gbc/metric.hpp"
#include "gbc/quadrature.hpp"

namespace gbc {

enum class CheckStatus : std::uint8_t { pass, fail, skip };

inline const char* status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    default: return "skip";
  }
}

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::skip;
  double measured = std::numeric_limits<double>::quiet_NaN();  ///< residual, ratio or slope
  double threshold = std::numeric_limits<double>::quiet_NaN();
  std::string detail;
};

struct VerifyConfig {
  int k = 1;
  int points = 100;    ///< random points for pointwise identities
  int fd_points = 3;   ///< random points for step-halving checks
  std::uint64_t seed = 0;
  /// Relative finite-difference step h / max(r, 1); 0 selects each check's own default.
  double fd_step = 0.0;
  int quad_degree = 12;
  std::vector<double> slope_radii = {4.0, 8.0, 16.0, 32.0};    ///< decay-slope checks
  std::vector<double> mass_radii = {10.0, 20.0, 40.0, 80.0};   ///< rotation check
};

namespace detail {

inline std::vector<double> random_direction(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> u(static_cast<std::size_t>(n));
  double s = 0.0;
  do {
    s = 0.0;
    for (double& v : u) {
      v = normal(rng);
      s += v * v;
    }
  } while (s < 1e-6);
  for (double& v : u) v /= std::sqrt(s);
  return u;
}

/// Sample points: AF families on 2 <= r <= 5, the compact model inside the
/// stereographic unit ball scale.
inline std::vector<std::vector<double>> sample_points(const MetricFamily& f, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double lo = 2.0, hi = 5.0;
  if (!f.asymptotically_flat()) {
    const double scale = 1.0 / std::sqrt(param_or(f.params(), "kappa", 1.0));
    lo = 0.1 * scale;
    hi = 1.5 * scale;
  }
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < count; ++i) {
    auto u = random_direction(f.dim(), rng);
    const double r = lo + (hi - lo) * uni(rng);
    for (double& v : u) v *= r;
    pts.push_back(std::move(u));
  }
  return pts;
}

/// |Rm|^k, the natural size of an order-k curvature expression.
inline double curvature_scale(const CurvatureBundle& b, int k) {
  return std::pow(std::sqrt(std::max(0.0, riemann_norm_sq(b))), k);
}

inline double scaled(double diff, double scale) { return scale > 0.0 ? diff / scale : diff; }

/// Least-squares slope of log v against log r.
inline double loglog_slope(std::span<const double> r, std::span<const double> v) {
  const std::size_t m = r.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = std::log(r[i]), y = std::log(v[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

inline double step_for(const VerifyConfig& c, double fallback, std::span<const double> x) {
  return (c.fd_step > 0.0 ? c.fd_step : fallback) * std::max(1.0, radius_of(x));
}

inline CheckResult skipped(std::string why) {
  CheckResult r;
  r.status = CheckStatus::skip;
  r.detail = std::move(why);
  return r;
}

/// Worst-case pointwise residual against a tolerance.
inline CheckResult tolerance_result(double worst, double tol, std::string detail = {}) {
  CheckResult r;
  r.measured = worst;
  r.threshold = tol;
  r.status = worst <= tol ? CheckStatus::pass : CheckStatus::fail;
  r.detail = std::move(detail);
  return r;
}

/// Step-halving verdict: residual ratios must sit in [3.5, 4.5] unless the
/// coarse residual is already at the noise floor.
struct HalvingTally {
  double worst_ratio_dev = 0.0;
  double reported = std::numeric_limits<double>::quiet_NaN();
  int resolved = 0;
  int at_floor = 0;
  bool ok = true;

  void add(double coarse, double fine, double floor) {
    if (coarse <= floor) {
      ++at_floor;
      return;
    }
    const double ratio = coarse / std::max(fine, std::numeric_limits<double>::min());
    ++resolved;
    const double dev = std::abs(ratio - 4.0);
    if (std::isnan(reported) || dev > worst_ratio_dev) {
      worst_ratio_dev = dev;
      reported = ratio;
    }
    if (!(ratio >= 3.5 && ratio <= 4.5)) ok = false;
  }

  CheckResult result() const {
    CheckResult r;
    r.measured = resolved > 0 ? reported : 0.0;
    r.threshold = 4.0;
    r.status = ok ? CheckStatus::pass : CheckStatus::fail;
    std::ostringstream os;
    os << "step-halving ratio in [3.5, 4.5]; " << resolved << " resolved, " << at_floor << " at noise floor";
    r.detail = os.str();
    return r;
  }
};

/// Slope verdict with relative tolerance; residuals that vanish identically pass.
inline CheckResult slope_result(std::span<const double> radii, std::span<const double> res, double expected,
                                double rel_tol, double zero_floor) {
  const double worst = *std::max_element(res.begin(), res.end());
  if (worst <= zero_floor) {
    CheckResult r;
    r.status = CheckStatus::pass;
    r.measured = 0.0;
    r.threshold = expected;
    r.detail = "residual vanishes identically";
    return r;
  }
  for (double v : res)
    if (!(v > 0.0)) {
      CheckResult r;
      r.status = CheckStatus::fail;
      r.detail = "residual hit zero at one radius; slope undefined";
      return r;
    }
  CheckResult r;
  r.measured = loglog_slope(radii, res);
  r.threshold = expected;
  r.status = std::abs(r.measured - expected) <= rel_tol * std::abs(expected) ? CheckStatus::pass
                                                                              : CheckStatus::fail;
  std::ostringstream os;
  os << "log-log slope vs expected " << expected << " (tolerance " << rel_tol * 100 << "%)";
  r.detail = os.str();
  return r;
}

inline std::vector<int> orders_below_half(int n) {
  std::vector<int> ks;
  for (int k = 1; 2 * k < n; ++k) ks.push_back(k);
  return ks;
}

inline bool order_ok(int n, int k) { return k >= 1 && 2 * k < n; }

}  // namespace detail

using CheckFn = std::function<CheckResult(const MetricFamily&, const VerifyConfig&)>;

struct CheckInfo {
  std::string name;
  std::string description;
  CheckFn run;
};

/// max_j |omega_jn + omega_j / r| in the adapted frame at x.
inline double frame_decay_residual(const MetricFamily& f, std::span<const double> x) {
  const int n = f.dim();
  const double r = radius_of(x);
  const FormTable om = connection_forms(build_adapted_frame(f, x));
  double worst = 0.0;
  for (int j = 0; j < n - 1; ++j) {
    DifferentialForm w = om(j, n - 1);
    w.axpy(1.0 / r, DifferentialForm::basis_one_form(n, j));
    worst = std::max(worst, w.max_abs());
  }
  return worst;
}

/// |d(r^{n-2k} Phi_k) - (n-2k)! L_k *1| at x (top coefficient, coordinate
/// coframe), d by a sixth-order stencil of step h.
inline double chern_remainder_residual(const MetricFamily& f, int k, std::span<const double> x, double h) {
  const int n = f.dim();
  check_order(n, k);
  const FrameSpec spec = adapted_spec_at(x);
  FormField field = [&](std::span<const double> y) {
    const auto bb = make_bundle(f, y, {k, k, false, false});
    const Frame g = build_frame(bb, spec);
    DifferentialForm p = chern_phi(k, connection_forms(g), curvature_two_forms(bb, g, CurvatureSign::riemann));
    p *= std::pow(radius_of(y), n - 2 * k);
    return to_coordinates(p, g);
  };
  const auto b = make_bundle(f, x, {k, k, false, false});
  const Frame fr = build_frame(b, spec);
  const double target = factorial(n - 2 * k) * to_coordinates(lk_volume_form(k, curvature_two_forms(b, fr)), fr).top();
  return std::abs(exterior_derivative_fd(field, x, h, 6).top() - target);
}

/// |r^{n-2k} nu*(Phi_k) + 2(n-2k-1)! E^(k)(r d_r, d_r)| per induced area at x.
inline double chern_intrinsic_residual(const MetricFamily& f, int k, std::span<const double> x) {
  const int n = f.dim();
  check_order(n, k);
  const auto b = make_bundle(f, x, {k, k, false, true});
  const auto u = unit_radial(x);
  return std::abs(chern_density(b, k) + 2.0 * factorial(n - 2 * k - 1) * lovelock_bilinear(b, b.lovelock.at(k), x, u));
}

namespace checks {

inline CheckResult l1(const MetricFamily& f, const VerifyConfig& c) {
  double worst = 0.0;
  for (const auto& x : detail::sample_points(f, c.points, c.seed)) {
    const auto b = make_bundle(f, x, {1, 1, false, false});
    worst = std::max(worst, detail::scaled(std::abs(b.lk.at(1) - b.scalar), detail::curvature_scale(b, 1)));
  }
  return detail::tolerance_result(worst, 1e-11, "|L_1 - R| / |Rm|");
}

inline CheckResult lanczos(const MetricFamily& f, const VerifyConfig& c) {
  if (f.dim() < 4) return detail::skipped("needs n >= 4");
  double worst = 0.0;
  for (const auto& x : detail::sample_points(f, c.points, c.seed)) {
    const auto b = make_bundle(f, x, {2, 2, false, false});
    const double rhs = riemann_norm_sq(b) - 4.0 * ricci_norm_sq(b) + b.scalar * b.scalar;
    worst = std::max(worst, detail::scaled(std::abs(b.lk.at(2) - rhs), detail::curvature_scale(b, 2)));
  }
  return detail::tolerance_result(worst, 1e-10, "|L_2 - (|Rm|^2 - 4|Ric|^2 + R^2)| / |Rm|^2");
}

inline CheckResult trace(const MetricFamily& f, const VerifyConfig& c) {
  const int n = f.dim();
  const auto ks = detail::orders_below_half(n);
  if (ks.empty()) return detail::skipped("no order with 2k < n");
  double worst = 0.0;
  for (const auto& x : detail::sample_points(f, c.points, c.seed)) {
    const auto b = make_bundle(f, x, {ks.back(), 1, false, true});
    for (int k : ks) {
      double tr = 0.0;
      for (int i = 0; i < n; ++i) tr += b.lovelock.at(k)(i, i);
      const double target = -0.5 * (n - 2 * k) * b.lk.at(k);
      worst = std::max(worst, detail::scaled(std::abs(tr - target), detail::curvature_scale(b, k)));
    }
  }
  return detail::tolerance_result(worst, 1e-10, "|tr E^(k) + (n-2k)/2 L_k| / |Rm|^k, all k with 2k < n");
}

inline CheckResult einstein(const MetricFamily& f, const VerifyConfig& c) {
  const int n = f.dim();
  if (n < 3) return detail::skipped("needs n >= 3");
  double worst = 0.0;
  for (const auto& x : detail::sample_points(f, c.points, c.seed)) {
    const auto b = make_bundle(f, x, {1, 1, false, true});
    const double scale = detail::curvature_scale(b, 1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double ric = 0.0;
        for (int a = 0; a < n; ++a) ric += b.ginv(i, a) * b.ricci(a, j);
        const double target = ric - (i == j ? 0.5 * b.scalar : 0.0);
        worst = std::max(worst, detail::scaled(std::abs(b.lovelock.at(1)(i, j) - target), scale));
      }
  }
  return detail::tolerance_result(worst, 1e-11, "|E^(1) - (Ric - R g / 2)| / |Rm| componentwise");
}

inline CheckResult lk_p(const MetricFamily& f, const VerifyConfig& c) {
  const int n = f.dim();
  const auto ks = detail::orders_below_half(n);
  if (ks.empty()) return detail::skipped("no order with 2k < n");
  double worst = 0.0;
  for (const auto& x : detail::sample_points(f, c.points, c.seed)) {
    const auto b = make_bundle(f, x, {ks.back(), 1, true, false});
    for (int k : ks) {
      const auto& p = b.p_tensor.at(k);
      double v = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int l = 0; l < n; ++l)
            for (int s = 0; s < n; ++s) v += p(i, j, l, s) * b.riemann_low(i, j, l, s);
      worst = std::max(worst, detail::scaled(std::abs(v - b.lk.at(k)), detail::curvature_scale(b, k)));
    }
  }
  return detail::tolerance_result(worst, 1e-10, "|P_(k) : Riem - L_k| / |Rm|^k, all k with 2k < n");
}

inline CheckResult p_symmetry(const MetricFamily& f, const VerifyConfig& c) {
  const auto ks = detail::orders_below_half(f.dim());
  if (ks.empty()) return detail::skipped("no order with 2k < n");
  double worst = 0.0;
  for (const auto& x : detail::sample_points(f, std::min(c.points, 20), c.seed)) {
    const auto b = make_bundle(f, x, {ks.back(), 1, true, false});
    for (int k : ks) {
      const double s = b.p_tensor.at(k).max_abs();
      worst = std::max(worst, detail::scaled(b.p_tensor.at(k).symmetry_residual(), s));
    }
  }
  return detail::tolerance_result(worst, 1e-12, "Riemann-type symmetries of P_(k), relative");
}

inline CheckResult riemann_symmetry(const MetricFamily& f, const VerifyConfig& c) {
  const int n = f.dim();
  double worst = 0.0;
  for (const auto& x : detail::sample_points(f, std::min(c.points, 20), c.seed)) {
    const auto b = make_bundle(f, x);
    const double s = b.riemann_low.max_abs();
    double bianchi = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
          for (int m = 0; m < n; ++m)
            bianchi = std::max(bianchi, std::abs(b.riemann_low(i, j, l, m) + b.riemann_low(i, l, m, j) +
                                                 b.riemann_low(i, m, j, l)));
    worst = std::max({worst, detail::scaled(b.riemann_low.symmetry_residual(), s), detail::scaled(bianchi, s)});
  }
  return detail::tolerance_result(worst, 1e-11, "pair symmetries and first Bianchi identity, relative");
}

inline CheckResult constant_curvature(const MetricFamily& f, const VerifyConfig& c) {
  if (f.name() != "constant_curvature") return detail::skipped("needs the constant_curvature family");
  const int n = f.dim();
  const double kappa = param_or(f.params(), "kappa", 1.0);
  double worst = 0.0;
  for (const auto& x : detail::sample_points(f, c.points, c.seed)) {
    const auto b = make_bundle(f, x, {n / 2, 1, false, false});
    for (int k = 1; 2 * k <= n; ++k) {
      const double oracle = factorial(n) / factorial(n - 2 * k) * std::pow(kappa, k);
      worst = std::max(worst, std::abs(b.lk.at(k) - oracle) / oracle);
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
          for (int s = 0; s < n; ++s) {
            const double want = kappa * gen_delta({l, s}, {i, j});
            worst = std::max(worst, std::abs(b.riemann_mixed(i, j, l, s) - want) / kappa);
          }
  }
  return detail::tolerance_result(worst, 1e-8, "L_k = n!/(n-2k)! kappa^k and R_ij^ls = kappa delta, relative");
}

inline CheckResult divergence(const MetricFamily& f, const VerifyConfig& c, bool of_p) {
  const int n = f.dim();
  if (!detail::order_ok(n, c.k)) return detail::skipped("needs 1 <= k and 2k < n");
  const int k = c.k;
  TensorField field = [&](std::span<const double> y) {
    const auto b = make_bundle(f, y, {k, k, of_p, !of_p});
    return of_p ? b.p_tensor.at(k) : b.lovelock.at(k);
  };
  detail::HalvingTally tally;
  for (const auto& x : detail::sample_points(f, c.fd_points, c.seed + 1)) {
    const double h = detail::step_for(c, 0.01, x);
    const double size = field(x).max_abs();
    const double coarse = covariant_divergence(field, f, x, h).max_abs();
    const double fine = covariant_divergence(field, f, x, 0.5 * h).max_abs();
    tally.add(coarse, fine, 1e-9 * size / h);
  }
  return tally.result();
}

inline CheckResult structure(const MetricFamily& f, const VerifyConfig& c) {
  const int n = f.dim();
  detail::HalvingTally tally;
  for (const auto& x : detail::sample_points(f, c.fd_points, c.seed + 2)) {
    const FrameSpec spec = f.asymptotically_flat() ? adapted_spec_at(x) : coordinate_spec();
    const auto b = make_bundle(f, x);
    const Frame fr = build_frame(b, spec);
    const FormTable om = connection_forms(fr);
    const FormTable cv = curvature_two_forms(b, fr, CurvatureSign::structure);
    auto frame_at = [&](std::span<const double> y) { return build_frame(make_bundle(f, y), spec); };
    const double h = detail::step_for(c, 0.01, x);
    double res[2] = {0.0, 0.0};
    double size = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
      const double step = pass == 0 ? h : 0.5 * h;
      for (int a = 0; a < n; ++a) {
        // first structure equation: d theta_a = omega_ab ^ theta_b
        FormField th = [&](std::span<const double> y) {
          return to_coordinates(DifferentialForm::basis_one_form(n, a), frame_at(y));
        };
        DifferentialForm rhs1(n, 2);
        for (int m = 0; m < n; ++m) rhs1 += wedge(om(a, m), DifferentialForm::basis_one_form(n, m));
        const auto r1 = to_coordinates(rhs1, fr);
        res[pass] = std::max(res[pass], (exterior_derivative_fd(th, x, step) - r1).max_abs());
        size = std::max(size, r1.max_abs());
        for (int d = a + 1; d < n; ++d) {
          FormField w = [&](std::span<const double> y) {
            const Frame g = frame_at(y);
            return to_coordinates(connection_forms(g)(a, d), g);
          };
          DifferentialForm rhs2 = cv(a, d);
          for (int m = 0; m < n; ++m) rhs2 += wedge(om(a, m), om(m, d));
          const auto r2 = to_coordinates(rhs2, fr);
          res[pass] = std::max(res[pass], (exterior_derivative_fd(w, x, step) - r2).max_abs());
          size = std::max(size, r2.max_abs());
        }
      }
    }
    tally.add(res[0], res[1], 1e-9 * std::max(size, 1e-300));
  }
  return tally.result();
}

inline CheckResult chern_recursion(const MetricFamily& f, const VerifyConfig& c) {
  const int n = f.dim();
  if (n < 3) return detail::skipped("needs n >= 3");
  detail::HalvingTally tally;
  for (const auto& x : detail::sample_points(f, c.fd_points, c.seed + 3)) {
    const FrameSpec spec = adapted_spec_at(x);
    const auto b = make_bundle(f, x);
    const Frame fr = build_frame(b, spec);
    const FormTable om = connection_forms(fr);
    const FormTable cv = curvature_two_forms(b, fr, CurvatureSign::structure);
    const double h = detail::step_for(c, 0.01, x);
    for (int k = 0; k <= n / 2 - 1; ++k) {
      FormField phi = [&](std::span<const double> y) {
        const auto bb = make_bundle(f, y);
        const Frame g = build_frame(bb, spec);
        return to_coordinates(chern_phi(k, connection_forms(g), curvature_two_forms(bb, g, CurvatureSign::structure)),
                              g);
      };
      DifferentialForm rhs = chern_psi(k - 1, om, cv);
      const double coef = (n - 2.0 * k - 1.0) / (2.0 * (k + 1));
      if (coef != 0.0) rhs.axpy(coef, chern_psi(k, om, cv));
      const double target = to_coordinates(rhs, fr).top();
      const double size = std::max(std::abs(target), to_coordinates(chern_phi(k, om, cv), fr).max_abs() / (radius_of(x)));
      const double coarse = std::abs(exterior_derivative_fd(phi, x, h).top() - target);
      const double fine = std::abs(exterior_derivative_fd(phi, x, 0.5 * h).top() - target);
      tally.add(coarse, fine, 1e-9 * std::max(size, 1e-300));
    }
  }
  return tally.result();
}

inline CheckResult transgression(const MetricFamily& f, const VerifyConfig& c) {
  const int n = f.dim();
  if (n % 2 != 0) return detail::skipped("needs even n");
  detail::HalvingTally tally;
  for (const auto& x : detail::sample_points(f, c.fd_points, c.seed + 4)) {
    const FrameSpec spec = adapted_spec_at(x);
    const auto b = make_bundle(f, x);
    const Frame fr = build_frame(b, spec);
    const FormTable cv = curvature_two_forms(b, fr, CurvatureSign::structure);
    FormField pi = [&](std::span<const double> y) {
      const auto bb = make_bundle(f, y);
      const Frame g = build_frame(bb, spec);
      return to_coordinates(transgression_pi(connection_forms(g), curvature_two_forms(bb, g, CurvatureSign::structure)),
                            g);
    };
    const double target = to_coordinates(lk_volume_form(n / 2, cv), fr).top();
    const double size = pi(x).max_abs() / std::max(1.0, radius_of(x));
    const double h = detail::step_for(c, 0.01, x);
    const double coarse = std::abs(exterior_derivative_fd(pi, x, h).top() - target);
    const double fine = std::abs(exterior_derivative_fd(pi, x, 0.5 * h).top() - target);
    tally.add(coarse, fine, 1e-9 * std::max(size, 1e-300));
  }
  return tally.result();
}

inline CheckResult pfaffian(const MetricFamily& f, const VerifyConfig& c) {
  const int n = f.dim();
  if (n % 2 != 0) return detail::skipped("needs even n");
  double worst = 0.0;
  for (const auto& x : detail::sample_points(f, std::min(c.points, 20), c.seed + 5)) {
    const auto b = make_bundle(f, x, {n / 2, n / 2, false, false});
    const Frame fr = build_frame(b, adapted_spec_at(x));
    const FormTable cv = curvature_two_forms(b, fr, CurvatureSign::riemann);
    const double psi = chern_psi(n / 2 - 1, connection_forms(fr), cv).top();
    const double euler = b.lk.at(n / 2);  // *1 has unit coefficient in an oriented orthonormal coframe
    worst = std::max(worst, detail::scaled(std::abs(psi - euler), detail::curvature_scale(b, n / 2)));
  }
  return detail::tolerance_result(worst, 1e-8, "|Psi_{n/2-1} - L_{n/2} *1| / |Rm|^{n/2}");
}

inline CheckResult star_q(const MetricFamily& f, const VerifyConfig& c) {
  const int n = f.dim();
  const auto ks = detail::orders_below_half(n);
  if (ks.empty()) return detail::skipped("no order with 2k < n");
  double worst = 0.0;
  for (const auto& x : detail::sample_points(f, std::min(c.points, 10), c.seed + 6)) {
    const auto b = make_bundle(f, x, {ks.back(), 1, true, false});
    const Frame fr = build_frame(b, f.asymptotically_flat() ? adapted_spec_at(x) : coordinate_spec());
    const FormTable cv = curvature_two_forms(b, fr, CurvatureSign::riemann);
    for (int k : ks) {
      const QForms q = q_and_star_q(b, fr, cv, k);
      DifferentialForm sum(n, n);
      double qsize = 0.0;
      for (int a = 0; a < n; ++a)
        for (int d = 0; d < n; ++d) {
          if (a == d) continue;
          sum += wedge(cv(a, d), q.star_q(a, d));
          qsize = std::max(qsize, q.q(a, d).max_abs());
        }
      for (int a = 0; a < n; ++a)
        for (int d = 0; d < n; ++d)
          worst = std::max(worst, detail::scaled((hodge_star(q.q(a, d)) - q.star_q(a, d)).max_abs(), qsize));
      const double scale = detail::curvature_scale(b, k);
      worst = std::max(worst, detail::scaled(std::abs(sum.top() - b.lk.at(k)), scale));
      worst = std::max(worst, detail::scaled(std::abs(lk_volume_form(k, cv).top() - b.lk.at(k)), scale));
    }
  }
  return detail::tolerance_result(worst, 1e-9, "L_k *1 = Omega ^ *Q, *Q = Hodge(Q), relative");
}

namespace slope_detail {

inline std::vector<double> direction(const MetricFamily& f, std::uint64_t seed) {
  std::mt19937_64 rng(seed + 11);
  return detail::random_direction(f.dim(), rng);
}

inline std::vector<double> at_radius(std::span<const double> u, double r) {
  std::vector<double> x(u.begin(), u.end());
  for (double& v : x) v *= r;
  return x;
}

inline CheckResult needs_af(const MetricFamily& f, const VerifyConfig& c) {
  if (!f.asymptotically_flat()) return detail::skipped("needs an asymptotically flat family");
  if (c.slope_radii.size() < 3) return detail::skipped("needs at least 3 slope radii");
  return CheckResult{"", CheckStatus::pass, 0, 0, ""};
}

}  // namespace slope_detail

inline CheckResult frame_decay(const MetricFamily& f, const VerifyConfig& c) {
  if (auto pre = slope_detail::needs_af(f, c); pre.status == CheckStatus::skip) return pre;
  const auto u = slope_detail::direction(f, c.seed);
  std::vector<double> res;
  for (double r : c.slope_radii) res.push_back(frame_decay_residual(f, slope_detail::at_radius(u, r)));
  const double tau = *f.decay_tau();
  return detail::slope_result(c.slope_radii, res, -(1.0 + tau), 0.15, 1e-13 / c.slope_radii.front());
}

inline CheckResult chern_remainder(const MetricFamily& f, const VerifyConfig& c) {
  if (auto pre = slope_detail::needs_af(f, c); pre.status == CheckStatus::skip) return pre;
  const int k = c.k;
  if (!detail::order_ok(f.dim(), k)) return detail::skipped("needs 1 <= k and 2k < n");
  const auto u = slope_detail::direction(f, c.seed);
  std::vector<double> res;
  double peak = 0.0;
  for (double r : c.slope_radii) {
    const auto x = slope_detail::at_radius(u, r);
    res.push_back(chern_remainder_residual(f, k, x, (c.fd_step > 0.0 ? c.fd_step : 0.02) * r));
    peak = std::max(peak, std::abs(lk_scalar(make_bundle(f, x), k)));
  }
  const double tau = *f.decay_tau();
  return detail::slope_result(c.slope_radii, res, -((k + 1) * tau + 2.0 * k), 0.20, 1e-12 * peak);
}

inline CheckResult chern_intrinsic(const MetricFamily& f, const VerifyConfig& c) {
  if (auto pre = slope_detail::needs_af(f, c); pre.status == CheckStatus::skip) return pre;
  const int k = c.k;
  if (!detail::order_ok(f.dim(), k)) return detail::skipped("needs 1 <= k and 2k < n");
  const auto u = slope_detail::direction(f, c.seed);
  std::vector<double> res;
  double peak = 0.0;
  for (double r : c.slope_radii) {
    const auto x = slope_detail::at_radius(u, r);
    res.push_back(chern_intrinsic_residual(f, k, x));
    peak = std::max(peak, std::abs(chern_density(make_bundle(f, x), k)));
  }
  const double tau = *f.decay_tau();
  return detail::slope_result(c.slope_radii, res, -((k + 1) * tau + 2.0 * k - 1.0), 0.20, 1e-13 * peak);
}

inline CheckResult stokes(const MetricFamily& f, const VerifyConfig& c) {
  if (!f.asymptotically_flat()) return detail::skipped("needs an asymptotically flat family");
  const int n = f.dim();
  const int k = c.k;
  if (!detail::order_ok(n, k)) return detail::skipped("needs 1 <= k and 2k < n");
  const SphereQuadrature quad(n, std::min(c.quad_degree, 12));
  const GaussRule radial = gauss_jacobi_symmetric(10, 0.0);
  const std::vector<double> base = {4.0, 8.0, 16.0};
  auto sphere_values = [&](double r) {
    // raw GBC flux and raw r^{n-2k} nu*(Phi_k) integral
    std::array<double, 2> s{};
    for (std::size_t q = 0; q < quad.size(); ++q) {
      std::vector<double> x(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) x[i] = r * quad.node(q)[i];
      const auto b = make_bundle(f, x, {k, k, true, false});
      s[0] += quad.weights[q] * gbc_density(b, b.p_tensor.at(k));
      s[1] += quad.weights[q] * chern_density(b, k) * area_ratio(b.g, b.ginv, x);
    }
    for (double& v : s) v *= std::pow(r, n - 1);
    return s;
  };
  auto annulus = [&](double r0, double r1) {
    // Euclidean and metric volume integrals of L_k
    std::array<double, 2> s{};
    for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
      const double r = 0.5 * (r0 + r1) + 0.5 * (r1 - r0) * radial.nodes[i];
      const double wr = 0.5 * (r1 - r0) * radial.weights[i] * std::pow(r, n - 1);
      for (std::size_t q = 0; q < quad.size(); ++q) {
        std::vector<double> x(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) x[j] = r * quad.node(q)[j];
        const auto b = make_bundle(f, x, {k, k, false, false});
        const double w = wr * quad.weights[q];
        s[0] += w * b.lk.at(k);
        s[1] += w * b.lk.at(k) * std::sqrt(spd_determinant(b.g));
      }
    }
    return s;
  };
  std::vector<double> gbc_res, chern_res, radii;
  double peak = 0.0;
  for (double r : base) {
    const auto inner = sphere_values(r), outer = sphere_values(2.0 * r);
    const auto vol = annulus(r, 2.0 * r);
    gbc_res.push_back(std::abs(2.0 * (outer[0] - inner[0]) - vol[0]));
    chern_res.push_back(std::abs((outer[1] - inner[1]) - factorial(n - 2 * k) * vol[1]));
    peak = std::max({peak, std::abs(inner[0]), std::abs(inner[1])});
    radii.push_back(r);
  }
  const double tau = *f.decay_tau();
  const double expected = n - (k + 1) * tau - 2.0 * k;
  if (!(expected < 0.0)) return detail::skipped("remainder does not decay for this (n, k, tau)");
  // Each residual must decay at least at 80% of the predicted rate.
  CheckResult out;
  out.threshold = expected;
  double slope_max = -std::numeric_limits<double>::infinity();
  bool ok = true;
  for (const auto* res : {&gbc_res, &chern_res}) {
    if (*std::max_element(res->begin(), res->end()) <= 1e-12 * std::max(peak, 1e-300)) continue;
    const double s = detail::loglog_slope(radii, *res);
    slope_max = std::max(slope_max, s);
    if (!(s <= 0.8 * expected)) ok = false;
  }
  out.measured = std::isfinite(slope_max) ? slope_max : 0.0;
  out.status = ok ? CheckStatus::pass : CheckStatus::fail;
  out.detail = "annulus Stokes residual slope, GBC flux and r^{n-2k} Phi_k forms";
  return out;
}

inline CheckResult measure(const MetricFamily& f, const VerifyConfig& c) {
  if (!f.asymptotically_flat()) return detail::skipped("needs an asymptotically flat family");
  const int n = f.dim();
  const SphereQuadrature quad(n, std::min(c.quad_degree, 12));
  std::vector<double> res;
  for (double r : c.slope_radii) {
    double sg = 0.0, sd = 0.0;
    for (std::size_t q = 0; q < quad.size(); ++q) {
      std::vector<double> x(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) x[i] = r * quad.node(q)[i];
      const Matrix g = f.eval(x).metric_matrix();
      sg += quad.weights[q] * area_ratio(g, spd_inverse(g), x);
      sd += quad.weights[q];
    }
    res.push_back(std::abs(sg / sd - 1.0));
  }
  const double tau = *f.decay_tau();
  if (*std::max_element(res.begin(), res.end()) <= 1e-14) {
    CheckResult r;
    r.status = CheckStatus::pass;
    r.measured = 0.0;
    r.threshold = -tau;
    r.detail = "areas agree identically";
    return r;
  }
  CheckResult r;
  r.measured = detail::loglog_slope(c.slope_radii, res);
  r.threshold = -tau;
  r.status = r.measured <= 0.8 * -tau ? CheckStatus::pass : CheckStatus::fail;
  r.detail = "slope of |area_g / area_delta - 1| must not exceed 80% of -tau";
  return r;
}

/// Exact monomial moment on S^{n-1}: 2 prod Gamma((a_i+1)/2) / Gamma((|a|+n)/2).
inline double sphere_moment(std::span<const int> a) {
  double lg = 0.0;
  int total = 0;
  for (int e : a) {
    if (e % 2 != 0) return 0.0;
    lg += std::lgamma(0.5 * (e + 1));
    total += e;
  }
  return 2.0 * std::exp(lg - std::lgamma(0.5 * (total + static_cast<double>(a.size()))));
}

inline CheckResult quadrature(const MetricFamily& f, const VerifyConfig& c) {
  const int n = f.dim();
  const int deg = c.quad_degree;
  const SphereQuadrature quad(n, deg);
  double worst = 0.0;
  double wsum = 0.0, wmin = std::numeric_limits<double>::infinity(), pole = 0.0;
  for (std::size_t q = 0; q < quad.size(); ++q) {
    wsum += quad.weights[q];
    wmin = std::min(wmin, quad.weights[q]);
    for (double v : quad.node(q)) pole = std::max(pole, std::abs(v));
  }
  // powers[q][i][e] = x_i^e
  const std::size_t stride = static_cast<std::size_t>(deg + 1);
  std::vector<double> powers(quad.size() * n * stride);
  for (std::size_t q = 0; q < quad.size(); ++q)
    for (int i = 0; i < n; ++i) {
      double v = 1.0;
      for (int e = 0; e <= deg; ++e) {
        powers[(q * n + i) * stride + e] = v;
        v *= quad.node(q)[i];
      }
    }
  std::vector<int> a(static_cast<std::size_t>(n), 0);
  while (true) {
    int total = 0;
    for (int e : a) total += e;
    if (total <= deg) {
      double s = 0.0;
      for (std::size_t q = 0; q < quad.size(); ++q) {
        double m = quad.weights[q];
        for (int i = 0; i < n; ++i) m *= powers[(q * n + i) * stride + a[i]];
        s += m;
      }
      worst = std::max(worst, std::abs(s - sphere_moment(a)));
    }
    int i = 0;
    while (i < n && ++a[i] > deg) a[i++] = 0;
    if (i == n) break;
  }
  worst = std::max(worst, std::abs(wsum - unit_sphere_area(n)));
  CheckResult r = detail::tolerance_result(worst, 1e-12, "all monomial moments up to the rule degree");
  if (!(wmin > 0.0) || pole >= 1.0 - 1e-9) {
    r.status = CheckStatus::fail;
    r.detail += "; nonpositive weight or node at a coordinate pole";
  }
  return r;
}

inline CheckResult quad_stability(const MetricFamily& f, const VerifyConfig& c) {
  if (!f.asymptotically_flat()) return detail::skipped("needs an asymptotically flat family");
  const int n = f.dim();
  if (!detail::order_ok(n, c.k)) return detail::skipped("needs 1 <= k and 2k < n");
  const SphereQuadrature lo(n, c.quad_degree), hi(n, 2 * c.quad_degree);
  const auto a = partial_masses(f, c.k, lo, 100.0), b = partial_masses(f, c.k, hi, 100.0);
  double worst = 0.0;
  for (int m = 0; m < 5; ++m) {
    const double s = std::max(std::abs(a[m]), std::abs(b[m]));
    worst = std::max(worst, detail::scaled(std::abs(a[m] - b[m]), s > 1e-300 ? s : 0.0));
  }
  return detail::tolerance_result(worst, 1e-9, "relative change at r = 100 when the quadrature degree doubles");
}

inline CheckResult decay(const MetricFamily& f, const VerifyConfig& c) {
  if (!f.asymptotically_flat()) return detail::skipped("needs an asymptotically flat family");
  std::vector<double> cs;
  for (double r : {10.0, 100.0, 1000.0}) cs.push_back(decay_constant(f, r, 16, c.seed + 7));
  const double hi = *std::max_element(cs.begin(), cs.end());
  const double lo = *std::min_element(cs.begin(), cs.end());
  CheckResult r;
  r.threshold = 4.0;
  std::ostringstream os;
  os << "decay constants C(10), C(100), C(1000) = " << cs[0] << ", " << cs[1] << ", " << cs[2];
  r.detail = os.str();
  if (hi == 0.0) {
    r.measured = 0.0;
    r.status = CheckStatus::pass;
    return r;
  }
  r.measured = hi / lo;
  r.status = std::isfinite(r.measured) && r.measured <= 4.0 ? CheckStatus::pass : CheckStatus::fail;
  return r;
}

inline CheckResult fd_derivatives(const MetricFamily& f, const VerifyConfig& c) {
  detail::HalvingTally tally;
  for (const auto& x : detail::sample_points(f, c.fd_points * 3, c.seed + 8)) {
    const double h = detail::step_for(c, 0.01, x);
    const auto a = fd_validate(f, x, h), b = fd_validate(f, x, 0.5 * h);
    const auto s = f.eval(x);
    double d1 = 0.0, d2 = 0.0;
    for (double v : s.dg) d1 = std::max(d1, std::abs(v));
    for (double v : s.d2g) d2 = std::max(d2, std::abs(v));
    tally.add(a.first, b.first, 1e-12 * std::max(1.0, d1) / h);
    tally.add(a.second, b.second, 1e-12 * std::max(1.0, d1 + d2) / h);
  }
  return tally.result();
}

inline Matrix fixed_rotation(int n) {
  Matrix rot = Matrix::identity(n);
  for (int i = 0; i + 1 < n; ++i) {
    const double t = 0.3 + 0.2 * i, cs = std::cos(t), sn = std::sin(t);
    Matrix g = Matrix::identity(n);
    g(i, i) = cs;
    g(i, i + 1) = -sn;
    g(i + 1, i) = sn;
    g(i + 1, i + 1) = cs;
    rot = g * rot;
  }
  return rot;
}

inline CheckResult rotation(const MetricFamily& f, const VerifyConfig& c) {
  if (!f.asymptotically_flat()) return detail::skipped("needs an asymptotically flat family");
  const int n = f.dim();
  if (!detail::order_ok(n, c.k)) return detail::skipped("needs 1 <= k and 2k < n");
  const SphereQuadrature quad(n, c.quad_degree);
  const auto a = mass_all(f, c.k, quad, c.mass_radii);
  const auto b = mass_all(f.rotated(fixed_rotation(n)), c.k, quad, c.mass_radii);
  double worst = 0.0;
  for (const auto& [name, fit] : a.fit) {
    const double other = b.fit.at(name).limit;
    const double s = std::max(std::abs(fit.limit), std::abs(other));
    worst = std::max(worst, s > 1e-12 ? std::abs(fit.limit - other) / s : std::abs(fit.limit - other));
  }
  return detail::tolerance_result(worst, 1e-8, "relative change of every extrapolated mass under a fixed rotation");
}

inline CheckResult euler_integral(const MetricFamily& f, const VerifyConfig& c) {
  if (f.name() != "constant_curvature" || f.dim() % 2 != 0)
    return detail::skipped("needs the constant_curvature family in even dimension");
  const int n = f.dim();
  const double kappa = param_or(f.params(), "kappa", 1.0);
  // r = tan(t/2)/sqrt(kappa), t in (0, pi), maps the whole chart onto a finite interval.
  const GaussRule rule = gauss_jacobi_symmetric(48, 0.0);
  const SphereQuadrature quad(n, std::min(c.quad_degree, 8));
  double total = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double t = 0.5 * M_PI * (rule.nodes[i] + 1.0);
    const double r = std::tan(0.5 * t) / std::sqrt(kappa);
    const double dr = 0.5 / (std::sqrt(kappa) * std::cos(0.5 * t) * std::cos(0.5 * t)) * 0.5 * M_PI;
    double shell = 0.0;
    for (std::size_t q = 0; q < quad.size(); ++q) {
      std::vector<double> x(static_cast<std::size_t>(n));
      for (int j = 0; j < n; ++j) x[j] = r * quad.node(q)[j];
      const auto b = make_bundle(f, x, {n / 2, n / 2, false, false});
      shell += quad.weights[q] * b.lk.at(n / 2) * std::sqrt(spd_determinant(b.g));
    }
    total += rule.weights[i] * dr * shell * std::pow(r, n - 1);
  }
  const double oracle = factorial(n) * unit_sphere_area(n + 1);
  return detail::tolerance_result(std::abs(total - oracle) / oracle, 1e-6,
                                  "integral of L_{n/2} over the round sphere vs n! * area(S^n)");
}

}  // namespace checks

inline const std::vector<CheckInfo>& check_registry() {
  static const std::vector<CheckInfo> reg = {
      {"l1", "L_1 equals the scalar curvature", checks::l1},
      {"lanczos", "L_2 equals |Rm|^2 - 4|Ric|^2 + R^2", checks::lanczos},
      {"trace", "trace of E^(k) equals -(n-2k)/2 L_k", checks::trace},
      {"einstein", "E^(1) equals Ric - R g / 2", checks::einstein},
      {"lk-p", "P_(k) : Riem equals L_k", checks::lk_p},
      {"p-symmetry", "P_(k) has the algebraic symmetries of the curvature tensor", checks::p_symmetry},
      {"riemann-symmetry", "Riemann pair symmetries and first Bianchi identity", checks::riemann_symmetry},
      {"constant-curvature", "L_k and R_ij^ls on the constant-curvature model", checks::constant_curvature},
      {"divergence-p", "covariant divergence of P_(k) vanishes at order h^2",
       [](const MetricFamily& f, const VerifyConfig& c) { return checks::divergence(f, c, true); }},
      {"divergence-e", "covariant divergence of E^(k) vanishes at order h^2",
       [](const MetricFamily& f, const VerifyConfig& c) { return checks::divergence(f, c, false); }},
      {"structure", "first and second structure equations at order h^2", checks::structure},
      {"chern-recursion", "d Phi_k = Psi_{k-1} + (n-2k-1)/(2(k+1)) Psi_k at order h^2", checks::chern_recursion},
      {"transgression", "d Pi = L_{n/2} *1 at order h^2", checks::transgression},
      {"pfaffian", "Psi_{n/2-1} equals L_{n/2} *1 pointwise", checks::pfaffian},
      {"star-q", "Omega ^ *Q equals L_k *1 and *Q equals the Hodge dual of Q", checks::star_q},
      {"frame-decay", "omega_jn + omega_j / r decays like r^{-1-tau}", checks::frame_decay},
      {"chern-remainder", "d(r^{n-2k} Phi_k) - (n-2k)! L_k *1 decays like r^{-(k+1)tau-2k}", checks::chern_remainder},
      {"chern-intrinsic", "r^{n-2k} nu*Phi_k + 2(n-2k-1)! E^(k)(X, d_r) decays like r^{-(k+1)tau-2k+1}", checks::chern_intrinsic},
      {"stokes", "flux differences match annulus integrals of L_k", checks::stokes},
      {"measure", "induced and Euclidean sphere areas agree to O(r^{-tau})", checks::measure},
      {"quadrature", "sphere rule integrates monomials up to its degree exactly", checks::quadrature},
      {"quad-stability", "partial masses at r = 100 are stable under doubling the degree", checks::quad_stability},
      {"decay", "sampled decay constant stays bounded at r = 10, 100, 1000", checks::decay},
      {"fd-derivatives", "analytic metric derivatives match central differences at order h^2",
       checks::fd_derivatives},
      {"rotation", "extrapolated masses are invariant under a chart rotation", checks::rotation},
      {"euler-integral", "integral of L_{n/2} over the round sphere", checks::euler_integral},
  };
  return reg;
}

inline std::vector<std::string> check_names() {
  std::vector<std::string> out;
  for (const auto& c : check_registry()) out.push_back(c.name);
  return out;
}

/// Expands "all" and validates names; unknown names throw with the list of
/// available checks.
inline std::vector<std::string> resolve_checks(const std::vector<std::string>& requested) {
  std::vector<std::string> out;
  const auto names = check_names();
  for (const auto& r : requested) {
    if (r == "all") {
      for (const auto& n : names)
        if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
      continue;
    }
    if (std::find(names.begin(), names.end(), r) == names.end()) {
      std::string list;
      for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
      throw ContractViolation("unknown check '" + r + "'; available: all, " + list);
    }
    if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
  }
  return out;
}

inline CheckResult run_check(const std::string& name, const MetricFamily& f, const VerifyConfig& c) {
  for (const auto& info : check_registry())
    if (info.name == name) {
      CheckResult r = info.run(f, c);
      r.name = name;
      return r;
    }
  throw ContractViolation("unknown check '" + name + "'");
}

inline std::vector<CheckResult> run_checks(const std::vector<std::string>& requested, const MetricFamily& f,
                                           const VerifyConfig& c) {
  std::vector<CheckResult> out;
  for (const auto& name : resolve_checks(requested)) out.push_back(run_check(name, f, c));
  return out;
}

}  // namespace gbc
