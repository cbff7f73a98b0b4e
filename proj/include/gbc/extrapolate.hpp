#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gbc/linalg.hpp"

namespace gbc {

struct Extrapolation {
  double limit = 0.0;
  double exponent = std::numeric_limits<double>::quiet_NaN();  ///< fitted p
  double amplitude = 0.0;                                       ///< a in m + a r^{-p}
  double residual = 0.0;  ///< RMS misfit of the fitted model
  bool p_unresolved = false;
  bool converged = true;
  std::string warning;
};

struct ExtrapolationOptions {
  std::optional<double> fixed_p;  ///< skip the exponent search and use this p
  /// Fixed exponent ladder: fit m + sum_j a_j r^{-p_j} by linear least squares
  /// (overrides fixed_p and two_term when non-empty).
  std::vector<double> exponents;
  bool two_term = false;          ///< model m + a r^{-p} + b r^{-p-1}
  double p_min = 1e-3;
  double p_max = 20.0;
};

namespace detail {

struct LinearFit {
  std::vector<double> coef;
  double rss = 0.0;
};

// Linear least squares for v ~ c0 + sum_j c_j r^{-p_j}. Columns are scaled
// by their value at the smallest radius for conditioning.
inline LinearFit fit_powers(std::span<const double> r, std::span<const double> v,
                            std::span<const double> powers) {
  const int m = static_cast<int>(r.size());
  const int cols = 1 + static_cast<int>(powers.size());
  const double r0 = r.front();
  Eigen::MatrixXd a(m, cols);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    a(i, 0) = 1.0;
    for (int j = 1; j < cols; ++j) a(i, j) = std::pow(r[i] / r0, -powers[j - 1]);
    b[i] = v[i];
  }
  const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
  LinearFit f;
  f.rss = (a * x - b).squaredNorm();
  f.coef.assign(x.data(), x.data() + cols);
  for (int j = 1; j < cols; ++j) f.coef[j] *= std::pow(r0, powers[j - 1]);
  return f;
}

inline LinearFit fit_fixed_p(std::span<const double> r, std::span<const double> v, double p, bool two_term) {
  const std::vector<double> powers = two_term ? std::vector<double>{p, p + 1.0} : std::vector<double>{p};
  return fit_powers(r, v, powers);
}

}  // namespace detail

/// Fits v(r) = m + a r^{-p} by variable projection: a log-grid scan over p
/// followed by golden-section refinement of the residual norm.
inline Extrapolation extrapolate(std::span<const double> radii, std::span<const double> values,
                                 const ExtrapolationOptions& opt = {}) {
  if (radii.size() != values.size()) throw ContractViolation("radii and values differ in length");
  const std::size_t need = opt.exponents.empty() ? (opt.two_term ? 5 : 4) : std::max<std::size_t>(4, opt.exponents.size() + 2);
  if (radii.size() < need)
    throw ContractViolation("extrapolation needs at least " + std::to_string(need) + " radii");
  for (std::size_t i = 0; i + 1 < radii.size(); ++i)
    if (!(radii[i + 1] > radii[i]) || !(radii[i] > 0.0))
      throw ContractViolation("radii must be positive and strictly increasing");
  for (double v : values)
    if (!std::isfinite(v)) throw GeometryError("non-finite value in extrapolation input");

  Extrapolation out;
  double scale = 0.0, mean = 0.0;
  for (double v : values) {
    scale = std::max(scale, std::abs(v));
    mean += v;
  }
  mean /= static_cast<double>(values.size());
  double spread = 0.0;
  for (double v : values) spread = std::max(spread, std::abs(v - mean));
  if (spread <= 1e-14 * scale || scale == 0.0) {
    out.limit = mean;
    out.p_unresolved = true;
    return out;
  }

  if (!opt.exponents.empty()) {
    const auto fit = detail::fit_powers(radii, values, opt.exponents);
    out.limit = fit.coef[0];
    out.amplitude = fit.coef[1];
    out.exponent = opt.exponents.front();
    out.residual = std::sqrt(fit.rss / static_cast<double>(values.size()));
    return out;
  }

  auto norm_at = [&](double p) { return std::sqrt(detail::fit_fixed_p(radii, values, p, opt.two_term).rss); };
  double best_p;
  if (opt.fixed_p) {
    best_p = *opt.fixed_p;
  } else {
    const int grid = 400;
    const double lo = std::log(opt.p_min), hi = std::log(opt.p_max);
    int best = 0;
    std::vector<double> ps(grid + 1), res(grid + 1);
    for (int i = 0; i <= grid; ++i) {
      ps[i] = std::exp(lo + (hi - lo) * i / grid);
      res[i] = norm_at(ps[i]);
      if (res[i] < res[best]) best = i;
    }
    double a = ps[std::max(0, best - 1)], b = ps[std::min(grid, best + 1)];
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = norm_at(c), fd = norm_at(d);
    for (int it = 0; it < 200 && (b - a) > 1e-13 * b; ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - phi * (b - a);
        fc = norm_at(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + phi * (b - a);
        fd = norm_at(d);
      }
    }
    best_p = 0.5 * (a + b);
    if (res[best] < norm_at(best_p)) best_p = ps[best];
    if (best == 0 || best == grid) out.warning = "decay exponent at the edge of the search range";
  }
  const auto fit = detail::fit_fixed_p(radii, values, best_p, opt.two_term);
  out.limit = fit.coef[0];
  out.amplitude = fit.coef[1];
  out.exponent = best_p;
  out.residual = std::sqrt(fit.rss / static_cast<double>(values.size()));
  // A tail that is not monotone beyond the fit accuracy signals trouble.
  const std::size_t m = values.size();
  const double d1 = values[m - 1] - values[m - 2], d2 = values[m - 2] - values[m - 3];
  if (d1 * d2 < 0.0 && out.residual > 1e-6 * scale) {
    out.converged = false;
    if (!out.warning.empty()) out.warning += "; ";
    out.warning += "non-monotone tail with large fit residual";
  }
  return out;
}

}  // namespace gbc
