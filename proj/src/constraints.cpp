#include "tmfa/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SVD>

namespace tmfa {

void TruncationProblem::validate() const {
  if (!(ratio_bound >= 1.0) || !std::isfinite(ratio_bound))
    throw std::invalid_argument("TruncationProblem: ratio bound must be finite and >= 1");
  if (group_weights.size() == 0 || (group_weights.array() < 0.0).any())
    throw std::invalid_argument("TruncationProblem: weights must be nonnegative");
  if (group_weights.sum() > 1.0 + 1e-12)
    throw std::invalid_argument("TruncationProblem: weights must sum to at most 1");
  for (const auto& e : values) {
    if (e.group < 0 || e.group >= group_weights.size())
      throw std::invalid_argument("TruncationProblem: entry group out of range");
    if (!(e.value >= 0.0) || !std::isfinite(e.value))
      throw std::invalid_argument("TruncationProblem: values must be finite and >= 0");
  }
}

double truncate_value(double v, double m, double c) {
  return std::min(c * m, std::max(v, m));
}

double truncation_objective(const TruncationProblem& problem, double m) {
  double total = 0.0;
  for (const auto& e : problem.values) {
    const double t = truncate_value(e.value, m, problem.ratio_bound);
    total += problem.group_weights(e.group) * (std::log(t) + e.value / t);
  }
  return total;
}

double optimal_threshold(const TruncationProblem& problem) {
  problem.validate();
  if (problem.values.empty())
    throw std::invalid_argument("optimal_threshold: no values");

  double vmax = 0.0;
  for (const auto& e : problem.values) vmax = std::max(vmax, e.value);
  if (vmax == 0.0)
    throw NumericError("optimal_threshold: all values are zero");

  const double c = problem.ratio_bound;

  std::vector<double> breaks;
  breaks.reserve(2 * problem.values.size());
  for (const auto& e : problem.values) {
    if (e.value > 0.0) {
      breaks.push_back(e.value);
      breaks.push_back(e.value / c);
    }
  }
  std::sort(breaks.begin(), breaks.end());

  // candidate per open interval: the clamped stationary point, or the probe
  // itself when no value is being clamped there
  auto candidate_in = [&](double lo, double hi, double probe) {
    double num = 0.0, den = 0.0;
    for (const auto& e : problem.values) {
      const double w = problem.group_weights(e.group);
      if (e.value < probe) {
        num += w * e.value;
        den += w;
      } else if (e.value > c * probe) {
        num += w * e.value / c;
        den += w;
      }
    }
    if (den <= 0.0) return probe;
    double m = num / den;
    m = std::min(std::max(m, lo), hi);
    return m > 0.0 ? m : probe;
  };

  double best_m = -1.0;
  double best_f = std::numeric_limits<double>::infinity();
  auto consider = [&](double m) {
    if (!(m > 0.0) || !std::isfinite(m)) return;
    const double f = truncation_objective(problem, m);
    if (f < best_f) {
      best_f = f;
      best_m = m;
    }
  };

  double lo = 0.0;
  for (std::size_t k = 0; k <= breaks.size(); ++k) {
    const double hi = (k < breaks.size()) ? breaks[k] : std::numeric_limits<double>::infinity();
    if (hi > lo) {
      double probe;
      if (!std::isfinite(hi))
        probe = 2.0 * lo + 1.0;
      else
        probe = (lo == 0.0) ? 0.5 * hi : 0.5 * (lo + hi);
      consider(candidate_in(lo, std::isfinite(hi) ? hi : probe, probe));
      consider(probe);
    }
    if (k < breaks.size()) {
      consider(breaks[k]);
      lo = breaks[k];
    }
  }

  if (best_m <= 0.0) throw NumericError("optimal_threshold: no valid threshold found");
  return best_m;
}

namespace {

// projection is a no-op when every value already fits inside some [m, c m]
bool ratio_feasible(const TruncationProblem& problem) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& e : problem.values) {
    lo = std::min(lo, e.value);
    hi = std::max(hi, e.value);
  }
  return lo > 0.0 && hi <= problem.ratio_bound * lo * (1.0 + 1e-12);
}

}  // namespace

std::vector<Matrix> enforce_loading_constraint(const std::vector<Matrix>& loadings,
                                               const Vector& weights, double c_load) {
  const int G = static_cast<int>(loadings.size());
  if (G == 0) return {};
  const int d = static_cast<int>(loadings[0].cols());

  std::vector<Eigen::JacobiSVD<Matrix>> svds;
  svds.reserve(G);
  TruncationProblem problem;
  problem.ratio_bound = c_load;
  problem.group_weights = weights;
  for (int g = 0; g < G; ++g) {
    svds.emplace_back(loadings[g], Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svds.back().singularValues();
    for (int k = 0; k < d; ++k) {
      const double s = (k < sv.size()) ? sv(k) : 0.0;
      problem.values.push_back({g, s * s});
    }
  }
  if (ratio_feasible(problem)) return loadings;

  const double m_opt = optimal_threshold(problem);

  // The spectrum is clamped in place, U diag(sqrt([e]_m)) V': keeping the
  // right factor preserves the column gauge of the input, which downstream
  // noise updates rely on (their cross terms are written in the factor
  // coordinates of the unprojected matrix).
  std::vector<Matrix> out(G);
  for (int g = 0; g < G; ++g) {
    const Matrix& u = svds[g].matrixU();
    const Matrix& v = svds[g].matrixV();
    const Vector& sv = svds[g].singularValues();  // d values, zeros included
    Vector scale(sv.size());
    for (int k = 0; k < sv.size(); ++k)
      scale(k) = std::sqrt(truncate_value(sv(k) * sv(k), m_opt, c_load));
    out[g] = u * scale.asDiagonal() * v.transpose();
  }
  return out;
}

std::vector<Vector> enforce_noise_constraint(const std::vector<Vector>& noise_diags,
                                             const Vector& weights, double c_noise) {
  const int G = static_cast<int>(noise_diags.size());
  if (G == 0) return {};

  TruncationProblem problem;
  problem.ratio_bound = c_noise;
  problem.group_weights = weights;
  for (int g = 0; g < G; ++g)
    for (int k = 0; k < noise_diags[g].size(); ++k)
      problem.values.push_back({g, noise_diags[g](k)});
  if (ratio_feasible(problem)) return noise_diags;

  const double m_opt = optimal_threshold(problem);

  std::vector<Vector> out(G);
  for (int g = 0; g < G; ++g) {
    out[g] = noise_diags[g];
    for (int k = 0; k < out[g].size(); ++k)
      out[g](k) = truncate_value(out[g](k), m_opt, c_noise);
  }
  return out;
}

}  // namespace tmfa
