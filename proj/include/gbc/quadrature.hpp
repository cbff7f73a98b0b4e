#pragma once

#include <cmath>
#include <cstdlib>
#include <functional>
#include <span>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gbc/linalg.hpp"

namespace gbc {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss rule for the weight (1 - t^2)^a on [-1, 1] (Golub-Welsch). a = 0 is
/// Gauss-Legendre.
inline GaussRule gauss_jacobi_symmetric(int count, double a) {
  if (count < 1) throw ContractViolation("Gauss rule needs at least one node");
  if (!(a > -1.0)) throw ContractViolation("Jacobi exponent must exceed -1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(count);
  Eigen::VectorXd sub(count > 1 ? count - 1 : 0);
  for (int i = 1; i < count; ++i) {
    const double beta = i * (i + 2.0 * a) / (4.0 * (i + a) * (i + a) - 1.0);
    sub[i - 1] = std::sqrt(beta);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  const double mu0 = std::sqrt(M_PI) * std::tgamma(a + 1.0) / std::tgamma(a + 1.5);
  GaussRule rule;
  for (int i = 0; i < count; ++i) {
    rule.nodes.push_back(es.eigenvalues()[i]);
    const double v = es.eigenvectors()(0, i);
    rule.weights.push_back(mu0 * v * v);
  }
  // Exact symmetry of the rule.
  for (int i = 0; i < count / 2; ++i) {
    const int j = count - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (count % 2 == 1) rule.nodes[count / 2] = 0.0;
  return rule;
}

/// Product rule on S^{n-1}: Gauss-Jacobi in the cosines of the n-2 polar
/// angles (weight matching the sin^m factor of the measure), trapezoid in
/// the azimuth with a half-step offset. Exact for polynomials of total
/// degree <= `degree`; no node sits on a coordinate pole.
struct SphereQuadrature {
  int dim = 0;
  int degree = 0;
  std::vector<double> nodes;  ///< node q occupies [q*dim, (q+1)*dim)
  std::vector<double> weights;

  SphereQuadrature() = default;
  SphereQuadrature(int n, int deg) : dim(n), degree(deg) {
    if (n < 2) throw ContractViolation("sphere quadrature needs n >= 2");
    if (deg < 0) throw ContractViolation("quadrature degree must be nonnegative");
    const int polar_count = deg / 2 + 1;
    // Exact for trigonometric degree <= deg needs deg + 1 points; a multiple
    // of 4 keeps the half-offset angles off every axis.
    const int az_count = (deg + 4) / 4 * 4;
    std::vector<GaussRule> polar;
    for (int j = 1; j <= n - 2; ++j) {
      const int m = n - 1 - j;
      polar.push_back(gauss_jacobi_symmetric(polar_count, 0.5 * (m - 1)));
    }
    std::vector<int> idx(polar.size(), 0);
    std::vector<double> x(static_cast<std::size_t>(n));
    while (true) {
      double s = 1.0, w = 1.0;
      for (std::size_t j = 0; j < polar.size(); ++j) {
        const double t = polar[j].nodes[idx[j]];
        x[n - 1 - j] = s * t;
        s *= std::sqrt(std::max(0.0, 1.0 - t * t));
        w *= polar[j].weights[idx[j]];
      }
      for (int l = 0; l < az_count; ++l) {
        const double phi = 2.0 * M_PI * (l + 0.5) / az_count;
        x[0] = s * std::cos(phi);
        x[1] = s * std::sin(phi);
        nodes.insert(nodes.end(), x.begin(), x.end());
        weights.push_back(w * 2.0 * M_PI / az_count);
      }
      std::size_t j = 0;
      while (j < idx.size() && ++idx[j] == polar_count) idx[j++] = 0;
      if (j == idx.size()) break;
    }
  }

  std::size_t size() const { return weights.size(); }
  std::span<const double> node(std::size_t q) const {
    return {nodes.data() + q * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

/// Worker count from GBC_THREADS (default 1).
inline int thread_count() {
  if (const char* env = std::getenv("GBC_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

/// Evaluates f(q) for q in [0, count) across workers; results land in q order
/// so any later reduction is deterministic.
template <typename T, typename F>
std::vector<T> parallel_map(std::size_t count, F&& f, int threads = thread_count()) {
  std::vector<T> out(count);
  if (threads <= 1 || count < 2) {
    for (std::size_t q = 0; q < count; ++q) out[q] = f(q);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t q = static_cast<std::size_t>(t); q < count; q += static_cast<std::size_t>(threads))
          out[q] = f(q);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// int_{S_r} f dsigma^delta for a density f given per unit-sphere node:
/// sum_q w_q f(r x_q) r^{n-1}.
inline double integrate_sphere(const std::function<double(std::span<const double>)>& f,
                               const SphereQuadrature& quad, double r) {
  if (!(r > 0.0)) throw ContractViolation("sphere radius must be positive");
  const int n = quad.dim;
  const auto vals = parallel_map<double>(quad.size(), [&](std::size_t q) {
    std::vector<double> x(static_cast<std::size_t>(n));
    const auto u = quad.node(q);
    for (int i = 0; i < n; ++i) x[i] = r * u[i];
    return f(x);
  });
  double s = 0.0;
  for (std::size_t q = 0; q < vals.size(); ++q) s += quad.weights[q] * vals[q];
  return s * std::pow(r, n - 1);
}

}  // namespace gbc
