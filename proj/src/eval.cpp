#include "tmfa/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/SVD>

namespace tmfa {

namespace {

bool is_contaminated(int truth_label) {
  return truth_label == kNoiseLabel || truth_label == kPointwiseLabel;
}

}  // namespace

std::vector<int> solve_assignment(const Matrix& cost) {
  // Hungarian method with potentials, O(n^3); 1-based scratch arrays.
  const int n = static_cast<int>(cost.rows());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = std::numeric_limits<double>::infinity();
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) assignment[p[j] - 1] = j - 1;
  return assignment;
}

double misclassification_error(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size())
    throw std::invalid_argument("misclassification_error: length mismatch");
  const int n = static_cast<int>(predicted.size());
  if (n == 0) return 0.0;

  int max_label = 0;
  for (int v : predicted) max_label = std::max(max_label, v);
  for (int v : truth)
    if (!is_contaminated(v)) max_label = std::max(max_label, v);
  const int G = max_label + 1;

  // errors independent of the relabeling, plus the clean-point confusion counts
  int fixed_errors = 0;
  Matrix hits = Matrix::Zero(G, G);  // hits(a, b): predicted a, truth b
  int matchable = 0;
  for (int i = 0; i < n; ++i) {
    if (is_contaminated(truth[i])) {
      if (predicted[i] != kTrimmedLabel) ++fixed_errors;
    } else if (predicted[i] == kTrimmedLabel) {
      ++fixed_errors;
    } else {
      hits(predicted[i], truth[i]) += 1.0;
      ++matchable;
    }
  }

  double best_hits = 0.0;
  if (G <= 8) {
    std::vector<int> perm(G);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double h = 0.0;
      for (int a = 0; a < G; ++a) h += hits(a, perm[a]);
      best_hits = std::max(best_hits, h);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    const std::vector<int> assignment = solve_assignment(-hits);
    for (int a = 0; a < G; ++a) best_hits += hits(a, assignment[a]);
  }

  const double errors = fixed_errors + (matchable - best_hits);
  return errors / static_cast<double>(n);
}

AlignResult align_to_truth(const MfaParams& estimate, const MfaParams& truth,
                           double max_mean_dist) {
  const int G = truth.n_components();
  if (estimate.n_components() != G)
    throw std::invalid_argument("align_to_truth: component count mismatch");

  Matrix dist(G, G);
  for (int a = 0; a < G; ++a)
    for (int b = 0; b < G; ++b) dist(a, b) = (estimate.means[a] - truth.means[b]).norm();

  std::vector<int> best_perm;
  double best_total = std::numeric_limits<double>::infinity();
  if (G <= 8) {
    std::vector<int> perm(G);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double total = 0.0;
      for (int b = 0; b < G; ++b) total += dist(perm[b], b);
      if (total < best_total) {
        best_total = total;
        best_perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    const std::vector<int> assignment = solve_assignment(dist);  // row -> truth column
    best_perm.assign(G, 0);
    for (int a = 0; a < G; ++a) best_perm[assignment[a]] = a;
  }

  AlignResult out;
  out.perm = best_perm;
  out.params.weights.resize(G);
  out.params.means.resize(G);
  out.params.loadings.resize(G);
  out.params.noise_diag.resize(G);
  for (int b = 0; b < G; ++b) {
    const int a = best_perm[b];
    out.params.weights(b) = estimate.weights(a);
    out.params.means[b] = estimate.means[a];
    out.params.noise_diag[b] = estimate.noise_diag[a];

    // orthogonal Procrustes onto the truth gauge
    const Matrix m = estimate.loadings[a].transpose() * truth.loadings[b];
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix rot = svd.matrixU() * svd.matrixV().transpose();
    out.params.loadings[b] = estimate.loadings[a] * rot;

    out.worst_mean_dist = std::max(out.worst_mean_dist, dist(a, b));
  }
  out.ok = out.worst_mean_dist <= max_mean_dist && out.params.weights.allFinite();
  for (int b = 0; b < G && out.ok; ++b)
    out.ok = out.params.means[b].allFinite() && out.params.loadings[b].allFinite() &&
             out.params.noise_diag[b].allFinite();
  return out;
}

BiasMse bias_mse(const std::vector<MfaParams>& aligned, const MfaParams& truth) {
  if (aligned.size() < 2) throw std::invalid_argument("bias_mse: need at least 2 estimates");
  const int G = truth.n_components();
  const double R = static_cast<double>(aligned.size());

  BiasMse out;
  auto block = [&](const std::string& key, auto extract, const Vector& truth_block) {
    const int dim = static_cast<int>(truth_block.size());
    Vector mean_est = Vector::Zero(dim);
    double mse = 0.0;
    for (const auto& est : aligned) {
      const Vector e = extract(est);
      mean_est += e;
      mse += (e - truth_block).squaredNorm();
    }
    mean_est /= R;
    mse /= R;
    const Vector bias_vec = mean_est - truth_block;
    out.bias[key] = bias_vec.cwiseAbs().mean();
    out.mse[key] = mse;
  };

  for (int g = 0; g < G; ++g) {
    const std::string suffix = "_" + std::to_string(g + 1);
    block("pi" + suffix,
          [g](const MfaParams& e) { return Vector::Constant(1, e.weights(g)); },
          Vector::Constant(1, truth.weights(g)));
    block("mu" + suffix, [g](const MfaParams& e) { return e.means[g]; }, truth.means[g]);
    block("psi" + suffix, [g](const MfaParams& e) { return e.noise_diag[g]; },
          truth.noise_diag[g]);

    auto flatten = [](const Matrix& m) {
      return Vector(Eigen::Map<const Vector>(m.data(), m.size()));
    };
    block("lambda" + suffix, [g, &flatten](const MfaParams& e) { return flatten(e.loadings[g]); },
          flatten(truth.loadings[g]));
    block("lamlamt" + suffix,
          [g, &flatten](const MfaParams& e) {
            return flatten(Matrix(e.loadings[g] * e.loadings[g].transpose()));
          },
          flatten(Matrix(truth.loadings[g] * truth.loadings[g].transpose())));
  }
  return out;
}

ExperimentReport run_experiment(const ScenarioSpec& scenario, const FitConfig& config,
                                int repetitions, std::uint64_t seed, Exec exec) {
  if (repetitions < 1) throw std::invalid_argument("run_experiment: repetitions must be >= 1");
  scenario.validate();

  ExperimentReport report;
  report.repetitions = repetitions;
  report.reps.resize(repetitions);

  const std::uint64_t base = mix64(seed);

  auto run_one = [&](int r) {
    ExperimentReport::RepRecord rec;
    ScenarioSpec sc = scenario;
    sc.seed = mix64(base + 2 * static_cast<std::uint64_t>(r));
    FitConfig cfg = config;
    cfg.seed = mix64(base + 2 * static_cast<std::uint64_t>(r) + 1);

    const GeneratedData gen = generate_scenario(sc);
    try {
      const FitResult result = fit(gen.data, cfg, Exec::serial);
      rec.eta = misclassification_error(result.labels, gen.labels);
      rec.target = result.target;
      rec.converged = result.converged;
      AlignResult aligned = align_to_truth(result.params, scenario.truth);
      if (aligned.ok) {
        rec.aligned = std::move(aligned.params);
      } else {
        rec.excluded = true;
        rec.note = "alignment failed";
      }
    } catch (const NumericError& e) {
      rec.excluded = true;
      rec.note = e.what();
    }
    return rec;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < repetitions; ++r) report.reps[r] = run_one(r);
  } else {
    for (int r = 0; r < repetitions; ++r) report.reps[r] = run_one(r);
  }

  double eta_sum = 0.0;
  int eta_count = 0;
  std::vector<MfaParams> aligned;
  aligned.reserve(repetitions);
  for (const auto& rec : report.reps) {
    if (rec.excluded) {
      ++report.excluded;
      continue;
    }
    eta_sum += rec.eta;
    ++eta_count;
    aligned.push_back(rec.aligned);
  }
  report.eta_mean = eta_count > 0 ? eta_sum / eta_count : 0.0;

  if (aligned.size() >= 2) {
    BiasMse stats = bias_mse(aligned, scenario.truth);
    report.bias = std::move(stats.bias);
    report.mse = std::move(stats.mse);
  }
  return report;
}

}  // namespace tmfa
