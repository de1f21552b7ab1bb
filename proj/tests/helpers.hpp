#ifndef TMFA_TESTS_HELPERS_HPP
#define TMFA_TESTS_HELPERS_HPP

#include <cmath>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "tmfa/constraints.hpp"
#include "tmfa/rng.hpp"
#include "tmfa/types.hpp"

namespace tmfa::testing {

// --- independent oracles -------------------------------------------------

// dense multivariate normal log-density built from scratch, independent of
// the production evaluation path
inline double dense_lognormal(const Vector& x, const Vector& mu, const Matrix& sigma) {
  const int p = static_cast<int>(x.size());
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("dense_lognormal: covariance not positive definite");
  double log_det = 0.0;
  for (int k = 0; k < p; ++k) log_det += 2.0 * std::log(llt.matrixLLT()(k, k));
  const Vector u = llt.matrixL().solve(x - mu);
  return -0.5 * p * std::log(2.0 * M_PI) - 0.5 * log_det - 0.5 * u.squaredNorm();
}

// brute-force minimum of the truncation objective over a log-spaced grid
inline double grid_min_objective(const TruncationProblem& problem, int grid_points = 10000) {
  double vmax = 0.0;
  for (const auto& e : problem.values) vmax = std::max(vmax, e.value);
  double vmin_pos = vmax;
  for (const auto& e : problem.values)
    if (e.value > 0.0) vmin_pos = std::min(vmin_pos, e.value);
  const double lo = std::log(vmin_pos / problem.ratio_bound * 0.5);
  const double hi = std::log(vmax * 2.0);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < grid_points; ++k) {
    const double m = std::exp(lo + (hi - lo) * k / (grid_points - 1.0));
    best = std::min(best, truncation_objective(problem, m));
  }
  return best;
}

// naive triple loop for Lambda Lambda' + Psi
inline Matrix naive_covariance(const Matrix& lambda, const Vector& psi) {
  const int p = static_cast<int>(lambda.rows());
  const int d = static_cast<int>(lambda.cols());
  Matrix sigma(p, p);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += lambda(a, k) * lambda(b, k);
      sigma(a, b) = s + (a == b ? psi(a) : 0.0);
    }
  return sigma;
}

// --- random generators ----------------------------------------------------

inline MfaParams random_params(Rng& rng, int G, int p, int d, double psi_lo = 0.05,
                               double psi_hi = 2.0) {
  MfaParams params;
  params.weights.resize(G);
  for (int g = 0; g < G; ++g) params.weights(g) = 0.2 + rng.uniform01();
  params.weights /= params.weights.sum();
  for (int g = 0; g < G; ++g) {
    params.means.push_back(rng.normal_vector(p) * 3.0);
    params.loadings.push_back(rng.normal_matrix(p, d));
    Vector psi(p);
    for (int k = 0; k < p; ++k) psi(k) = rng.uniform(psi_lo, psi_hi);
    params.noise_diag.push_back(psi);
  }
  return params;
}

inline TruncationProblem random_problem(Rng& rng, int max_values = 12) {
  TruncationProblem problem;
  const int G = 1 + static_cast<int>(rng.below(3));
  const int per_group = 1 + static_cast<int>(rng.below(max_values / G));
  problem.group_weights.resize(G);
  for (int g = 0; g < G; ++g) problem.group_weights(g) = 0.1 + rng.uniform01();
  problem.group_weights /= problem.group_weights.sum();
  problem.ratio_bound = 1.0 + rng.uniform01() * 20.0;
  bool any_positive = false;
  for (int g = 0; g < G; ++g) {
    for (int k = 0; k < per_group; ++k) {
      double v = std::exp(rng.uniform(-4.0, 4.0));
      if (rng.uniform01() < 0.1) v = 0.0;
      any_positive = any_positive || v > 0.0;
      problem.values.push_back({g, v});
    }
  }
  if (!any_positive) problem.values.push_back({0, 1.0});
  return problem;
}

}  // namespace tmfa::testing

#endif
