#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gbc/curvature.hpp"
#include "gbc/extrapolate.hpp"
#include "gbc/forms.hpp"
#include "gbc/frame.hpp"
#include "gbc/metric.hpp"
#include "gbc/quadrature.hpp"

namespace gbc {

/// Names of the reported quantities, in report order.
inline const std::array<std::string, 5>& mass_names() {
  static const std::array<std::string, 5> names = {"gbc", "intrinsic", "chern", "adm", "omega_starq"};
  return names;
}

inline std::vector<double> unit_radial(std::span<const double> x) {
  double r = 0.0;
  for (double v : x) r += v * v;
  r = std::sqrt(r);
  if (r == 0.0) throw GeometryError("radial direction undefined at the origin");
  std::vector<double> u(x.begin(), x.end());
  for (double& v : u) v /= r;
  return u;
}

inline double radius_of(std::span<const double> x) {
  double r = 0.0;
  for (double v : x) r += v * v;
  return std::sqrt(r);
}

/// dsigma^g / dsigma^delta on the coordinate sphere through x.
inline double area_ratio(const Matrix& g, const Matrix& ginv, std::span<const double> x) {
  const auto nrm = unit_radial(x);
  const int n = g.size();
  double q = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) q += ginv(i, j) * nrm[i] * nrm[j];
  return std::sqrt(spd_determinant(g) * q);
}

/// Metric unit normal nu = grad r / |grad r| in coordinate components.
inline std::vector<double> metric_normal(const Matrix& ginv, std::span<const double> x) {
  const auto nrm = unit_radial(x);
  const int n = ginv.size();
  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  double q = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      v[i] += ginv(i, j) * nrm[j];
      q += ginv(i, j) * nrm[i] * nrm[j];
    }
  for (double& c : v) c /= std::sqrt(q);
  return v;
}

// --- pointwise densities -------------------------------------------------

/// P^{ijls} d_s g_jl nu^delta_i (per Euclidean area).
inline double gbc_density(const CurvatureBundle& b, const DenseTensor& p) {
  const int n = b.dim;
  const auto nrm = unit_radial(b.point);
  double v = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l)
        for (int s = 0; s < n; ++s) v += p(i, j, l, s) * b.sample.d1(s, j, l) * nrm[i];
  return v;
}

/// (g_ij,i - g_ii,j) nu^delta_j (per Euclidean area).
inline double adm_density(const MetricSample& s, std::span<const double> x) {
  const int n = s.dim;
  const auto nrm = unit_radial(x);
  double v = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) v += (s.d1(i, i, j) - s.d1(j, i, i)) * nrm[j];
  return v;
}

/// E^(k)(X, nu) with X = x^i d_i (per induced area).
inline double intrinsic_density(const CurvatureBundle& b, const DenseTensor& e) {
  const auto nu = metric_normal(b.ginv, b.point);
  return lovelock_bilinear(b, e, b.point, nu);
}

/// r^{n-2k} nu*(Phi_k) per induced area: with dsigma^g = (-1)^{n-1} omega_1..omega_{n-1}
/// the pullback is (-1)^{n-1} times the tangential coefficient.
inline double chern_density(const CurvatureBundle& b, int k) {
  const int n = b.dim;
  const Frame fr = build_frame(b, adapted_spec_at(b.point));
  const FormTable om = connection_forms(fr);
  const FormTable cv = curvature_two_forms(b, fr, CurvatureSign::riemann);
  const DifferentialForm phi = chern_phi(k, om, cv);
  const double tangential = phi.at_mask(detail::low_mask(n - 1));
  return ((n - 1) % 2 == 0 ? 1.0 : -1.0) * std::pow(radius_of(b.point), n - 2 * k) * tangential;
}

/// Flux density of sum omega_ba ^ *Q^ab built in the Gram-Schmidt coordinate
/// frame (per Euclidean area).
inline double omega_starq_density(const CurvatureBundle& b, int k) {
  const Frame fr = build_frame(b, coordinate_spec());
  const FormTable om = connection_forms(fr);
  const FormTable cv = curvature_two_forms(b, fr, CurvatureSign::riemann);
  const QForms q = q_and_star_q(b, fr, cv, k);
  const DifferentialForm w = to_coordinates(omega_wedge_star_q(om, q), fr);
  return flux_density(w, unit_radial(b.point));
}

/// Public integrand entry points, each evaluated from scratch at one point.
inline double gbc_integrand(const MetricFamily& f, int k, std::span<const double> x) {
  check_order(f.dim(), k);
  const auto b = make_bundle(f, x, {k, k, true, false});
  return gbc_density(b, b.p_tensor.at(k));
}
inline double adm_integrand(const MetricFamily& f, std::span<const double> x) {
  if (f.dim() < 3) throw ContractViolation("ADM mass needs n >= 3");
  return adm_density(f.eval(x), x);
}
inline double intrinsic_integrand(const MetricFamily& f, int k, std::span<const double> x) {
  check_order(f.dim(), k);
  const auto b = make_bundle(f, x, {k, k, false, true});
  return intrinsic_density(b, b.lovelock.at(k));
}
inline double chern_integrand(const MetricFamily& f, int k, std::span<const double> x) {
  check_order(f.dim(), k);
  return chern_density(make_bundle(f, x), k);
}
inline double omega_starq_integrand(const MetricFamily& f, int k, std::span<const double> x) {
  check_order(f.dim(), k);
  const auto b = make_bundle(f, x, {k, k, true, false});
  return omega_starq_density(b, k);
}

/// All five densities at one point, converted to Euclidean area.
struct PointDensities {
  std::array<double, 5> v{};  ///< order of mass_names()
};

inline PointDensities point_densities(const MetricFamily& f, int k, std::span<const double> x) {
  const auto b = make_bundle(f, x, {k, k, true, true});
  const double ratio = area_ratio(b.g, b.ginv, x);
  PointDensities d;
  d.v[0] = gbc_density(b, b.p_tensor.at(k));
  d.v[1] = intrinsic_density(b, b.lovelock.at(k)) * ratio;
  d.v[2] = chern_density(b, k) * ratio;
  d.v[3] = (k == 1) ? adm_density(b.sample, x) : 0.0;
  d.v[4] = omega_starq_density(b, k);
  return d;
}

// --- prefactors ------------------------------------------------------------

inline double gbc_prefactor(int n, int k) {
  return factorial(n - 2 * k) / (std::pow(2.0, k - 1) * factorial(n - 1) * unit_sphere_area(n));
}
inline double intrinsic_prefactor(int n, int k) {
  return -factorial(n - 2 * k - 1) / (std::pow(2.0, k - 1) * factorial(n - 1) * unit_sphere_area(n));
}
inline double chern_prefactor(int n, int k) {
  return 1.0 / (std::pow(2.0, k) * factorial(n - 1) * unit_sphere_area(n));
}
inline double adm_prefactor(int n) { return 1.0 / (2.0 * (n - 1) * unit_sphere_area(n)); }
/// omega ^ *Q integrates to twice the GBC flux, so it is reported as c(n,k)/2 times its integral.
inline double omega_starq_prefactor(int n, int k) { return 0.5 * gbc_prefactor(n, k); }

inline std::array<double, 5> mass_prefactors(int n, int k) {
  return {gbc_prefactor(n, k), intrinsic_prefactor(n, k), chern_prefactor(n, k), adm_prefactor(n),
          omega_starq_prefactor(n, k)};
}

/// Normalised partial masses on S_r (all five; adm is 0 unless k = 1).
inline std::array<double, 5> partial_masses(const MetricFamily& f, int k, const SphereQuadrature& quad,
                                            double r) {
  const int n = f.dim();
  const auto vals = parallel_map<PointDensities>(quad.size(), [&](std::size_t q) {
    std::vector<double> x(static_cast<std::size_t>(n));
    const auto u = quad.node(q);
    for (int i = 0; i < n; ++i) x[i] = r * u[i];
    return point_densities(f, k, x);
  });
  std::array<double, 5> sum{};
  for (std::size_t q = 0; q < vals.size(); ++q)
    for (int m = 0; m < 5; ++m) sum[m] += quad.weights[q] * vals[q].v[m];
  const auto pre = mass_prefactors(n, k);
  const double rn = std::pow(r, n - 1);
  for (int m = 0; m < 5; ++m) sum[m] *= pre[m] * rn;
  return sum;
}

// --- report ------------------------------------------------------------------

struct Discrepancy {
  double absolute = 0.0;
  double relative = 0.0;
  bool pass = false;  ///< |a-b| <= max(0.01 max(|a|,|b|), 1e-3)
};

inline Discrepancy compare_masses(double a, double b, double rel_tol = 0.01, double abs_tol = 1e-3) {
  Discrepancy d;
  d.absolute = std::abs(a - b);
  const double s = std::max(std::abs(a), std::abs(b));
  d.relative = s > 0.0 ? d.absolute / s : 0.0;
  d.pass = d.absolute <= std::max(rel_tol * s, abs_tol);
  return d;
}

struct MassReport {
  std::string family;
  ParamMap params;
  int n = 0;
  int k = 0;
  int quad_degree = 0;
  std::optional<double> tau;
  std::vector<double> radii;
  std::map<std::string, std::vector<double>> partial;  ///< keyed by mass_names()
  std::map<std::string, Extrapolation> fit;       ///< primary limits (exponent ladder)
  std::map<std::string, Extrapolation> fit_free;  ///< m + a r^{-p} with p fitted
  std::vector<double> ladder;                     ///< exponents used by `fit`
  std::map<std::string, Discrepancy> discrepancies;
  std::vector<std::string> warnings;

  bool has(const std::string& name) const { return partial.count(name) != 0; }
};

/// Decay threshold of the mass definitions: tau > (n-2k)/(k+1).
inline double decay_threshold(int n, int k) { return static_cast<double>(n - 2 * k) / (k + 1); }

struct MassOptions {
  bool two_term = false;  ///< free fit uses m + a r^{-p} + b r^{-p-1}
  int ladder_terms = 3;   ///< at most this many ladder exponents (and count - 2)
};

/// Decay exponents of the partial masses: the flux is quadratic and higher in
/// sigma = g - delta, so v(r) - m expands in r^{-(k tau + 2k - n + j tau)},
/// j = 0, 1, ...; non-positive entries belong to the limit itself.
inline std::vector<double> exponent_ladder(int n, int k, double tau, int terms) {
  std::vector<double> p;
  const double p0 = k * (tau + 2.0) - n;
  for (int j = 0; static_cast<int>(p.size()) < terms && j < 64; ++j) {
    const double e = p0 + j * tau;
    if (e > 60.0) break;
    if (e > 1e-9) p.push_back(e);
  }
  return p;
}

inline MassReport mass_all(const MetricFamily& f, int k, const SphereQuadrature& quad,
                           std::span<const double> radii, const MassOptions& opt = {}) {
  const int n = f.dim();
  check_order(n, k);
  if (quad.dim != n) throw ContractViolation("quadrature dimension does not match the metric");
  if (radii.size() < 4) throw ContractViolation("mass extrapolation needs at least 4 radii");
  for (std::size_t i = 0; i + 1 < radii.size(); ++i)
    if (!(radii[i + 1] > radii[i])) throw ContractViolation("radii must be strictly increasing");
  if (!f.asymptotically_flat()) throw ContractViolation("masses need an asymptotically flat family");

  MassReport rep;
  rep.family = f.name();
  rep.params = f.params();
  rep.n = n;
  rep.k = k;
  rep.quad_degree = quad.degree;
  rep.tau = f.decay_tau();
  rep.radii.assign(radii.begin(), radii.end());
  if (*rep.tau <= decay_threshold(n, k))
    rep.warnings.push_back("decay order tau = " + std::to_string(*rep.tau) +
                           " is at or below the threshold (n-2k)/(k+1) = " +
                           std::to_string(decay_threshold(n, k)) + "; limits may not exist");

  const auto& names = mass_names();
  for (double r : radii) {
    const auto pm = partial_masses(f, k, quad, r);
    for (int m = 0; m < 5; ++m) {
      if (m == 3 && k != 1) continue;
      rep.partial[names[m]].push_back(pm[m]);
    }
  }
  rep.ladder = exponent_ladder(n, k, *rep.tau,
                               std::min(opt.ladder_terms, static_cast<int>(radii.size()) - 2));
  for (const auto& [name, vals] : rep.partial) {
    ExtrapolationOptions free_opt;
    free_opt.two_term = opt.two_term && vals.size() >= 5;
    rep.fit_free[name] = extrapolate(rep.radii, vals, free_opt);
    if (rep.ladder.empty()) {
      rep.fit[name] = rep.fit_free[name];
    } else {
      ExtrapolationOptions lo;
      lo.exponents = rep.ladder;
      rep.fit[name] = extrapolate(rep.radii, vals, lo);
    }
    if (!rep.fit_free[name].warning.empty())
      rep.warnings.push_back(name + " (free fit): " + rep.fit_free[name].warning);
  }
  auto lim = [&](const char* s) { return rep.fit.at(s).limit; };
  rep.discrepancies["gbc_vs_intrinsic"] = compare_masses(lim("gbc"), lim("intrinsic"));
  rep.discrepancies["gbc_vs_chern"] = compare_masses(lim("gbc"), lim("chern"));
  rep.discrepancies["intrinsic_vs_chern"] = compare_masses(lim("intrinsic"), lim("chern"));
  rep.discrepancies["gbc_vs_omega_starq"] = compare_masses(lim("gbc"), lim("omega_starq"));
  if (k == 1) rep.discrepancies["gbc_vs_adm"] = compare_masses(lim("gbc"), lim("adm"));
  return rep;
}

/// Geometric radius schedule r0 * factor^j, j < count.
inline std::vector<double> geometric_radii(double r0, double factor, int count) {
  if (!(r0 > 0.0) || !(factor > 1.0) || count < 1)
    throw ContractViolation("radius schedule needs r0 > 0, factor > 1, count >= 1");
  std::vector<double> r;
  for (int j = 0; j < count; ++j) r.push_back(r0 * std::pow(factor, j));
  return r;
}

}  // namespace gbc
