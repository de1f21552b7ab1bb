#include "tmfa/aecm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>

#include "tmfa/constraints.hpp"
#include "tmfa/lowrank_gauss.hpp"
#include "tmfa/model.hpp"

namespace tmfa {

void FitConfig::validate(const DataMatrix& data) const {
  data.validate();
  bounds.validate();
  const int n = data.n_rows();
  const int p = data.n_cols();
  if (n_components < 1) throw std::invalid_argument("FitConfig: n_components must be >= 1");
  if (n_factors < 1 || n_factors >= p)
    throw std::invalid_argument("FitConfig: requires 1 <= n_factors < p");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("FitConfig: alpha must be in [0,1)");
  if (n_starts < 1) throw std::invalid_argument("FitConfig: n_starts must be >= 1");
  if (max_iter < 1) throw std::invalid_argument("FitConfig: max_iter must be >= 1");
  if (!(tol_target > 0.0)) throw std::invalid_argument("FitConfig: tol_target must be positive");
  if (n < n_components * (p + 1))
    throw std::invalid_argument("FitConfig: need n >= G(p+1) rows for subsample initialization");
  if (trim_keep_count(n, alpha) < n_components * (p + 1))
    throw std::invalid_argument("FitConfig: trimmed sample too small, need floor(n(1-alpha)) >= G(p+1)");
}

int trim_keep_count(int n, double alpha) {
  return static_cast<int>(std::floor(static_cast<double>(n) * (1.0 - alpha) + 1e-9));
}

EStepResult e_step_trim(const DataMatrix& data, const MfaParams& params, double alpha, Exec exec) {
  const int n = data.n_rows();
  const int G = params.n_components();
  const int h = trim_keep_count(n, alpha);

  const Matrix scores = score_matrix(data, params, exec);

  Vector log_mix(n);
  for (int i = 0; i < n; ++i) log_mix(i) = log_sum_exp(scores.row(i));

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (log_mix(a) != log_mix(b)) return log_mix(a) > log_mix(b);
    return a < b;
  });

  EStepResult result;
  result.kept.assign(order.begin(), order.begin() + h);
  std::sort(result.kept.begin(), result.kept.end());

  result.posteriors = Matrix::Zero(n, G);
  result.target_terms = Vector::Zero(n);
  result.target = 0.0;
  for (int i : result.kept) {
    const double li = log_mix(i);
    if (!std::isfinite(li))
      throw NumericError("e_step_trim: mixture density vanished for a kept point");
    for (int g = 0; g < G; ++g) result.posteriors(i, g) = std::exp(scores(i, g) - li);
    result.target_terms(i) = li;
    result.target += li;
  }
  return result;
}

std::pair<Vector, std::vector<Vector>> cm_step_1(const DataMatrix& data, const Matrix& posteriors,
                                                 double alpha) {
  const int n = data.n_rows();
  const int p = data.n_cols();
  const int G = static_cast<int>(posteriors.cols());
  const double h = static_cast<double>(trim_keep_count(n, alpha));

  Vector weights(G);
  std::vector<Vector> means(G);
  for (int g = 0; g < G; ++g) {
    const double n_g = posteriors.col(g).sum();
    if (n_g < 1e-8) throw NumericError("cm_step_1: component lost all mass");
    weights(g) = n_g / h;
    Vector acc = Vector::Zero(p);
    for (int i = 0; i < n; ++i) {
      const double t = posteriors(i, g);
      if (t > 0.0) acc += t * data.values.row(i).transpose();
    }
    means[g] = acc / n_g;
  }
  return {weights, means};
}

namespace {

Matrix weighted_scatter(const DataMatrix& data, const Matrix& posteriors, int g,
                        const Vector& mean, double n_g) {
  const int p = data.n_cols();
  Matrix s = Matrix::Zero(p, p);
  for (int i = 0; i < data.n_rows(); ++i) {
    const double t = posteriors(i, g);
    if (t > 0.0) {
      const Vector r = data.values.row(i).transpose() - mean;
      s.selfadjointView<Eigen::Lower>().rankUpdate(r, t);
    }
  }
  s = s.selfadjointView<Eigen::Lower>();
  return s / n_g;
}

struct ScatterPieces {
  Matrix scatter;     // S_g, p x p
  Matrix gamma_s;     // gamma S_g, d x p
  Matrix xi;          // I - gamma Lambda_prev + gamma S gamma', d x d
};

// the unconstrained ML pieces shared by both cm_step_2 variants
std::vector<ScatterPieces> cm_step_2_pieces(const DataMatrix& data, const Matrix& posteriors,
                                            const std::vector<Vector>& means,
                                            const MfaParams& params_prev,
                                            std::vector<Matrix>& loadings_out) {
  const int G = static_cast<int>(posteriors.cols());
  std::vector<ScatterPieces> pieces(G);
  loadings_out.resize(G);
  for (int g = 0; g < G; ++g) {
    const double n_g = posteriors.col(g).sum();
    if (n_g < 1e-8) throw NumericError("cm_step_2: component lost all mass");
    pieces[g].scatter = weighted_scatter(data, posteriors, g, means[g], n_g);

    ComponentKernel prev(params_prev.means[g], params_prev.loadings[g],
                         params_prev.noise_diag[g]);
    const Matrix& gamma = prev.gamma();

    // xi_g aggregates the per-point factor second moments under tau weights
    pieces[g].gamma_s = gamma * pieces[g].scatter;                               // d x p
    Matrix xi = prev.residual_cov() + pieces[g].gamma_s * gamma.transpose();     // d x d
    pieces[g].xi = 0.5 * (xi + xi.transpose()).eval();

    Eigen::LLT<Matrix> llt(pieces[g].xi);
    if (llt.info() != Eigen::Success)
      throw NumericError("cm_step_2: degenerate factor posterior");

    loadings_out[g] = llt.solve(pieces[g].gamma_s).transpose();  // S gamma' xi^{-1}, p x d
  }
  return pieces;
}

// Diagonal of the expected residual moment
//   V(Lambda) = S - Lambda gamma S - (gamma S)' Lambda' + Lambda Xi Lambda',
// the conditional noise maximizer for whatever loadings come out of the
// projection. At the unconstrained optimum this collapses to the familiar
// diag(S - Lambda gamma S). V is PSD for any Lambda; negatives are roundoff.
Vector noise_from_loadings(const ScatterPieces& pieces, const Matrix& loadings) {
  const Vector cross = (loadings * pieces.gamma_s).diagonal();
  const Vector quad = ((loadings * pieces.xi).cwiseProduct(loadings)).rowwise().sum();
  const Vector psi = pieces.scatter.diagonal() - 2.0 * cross + quad;
  return psi.cwiseMax(0.0);
}

}  // namespace

std::pair<std::vector<Matrix>, std::vector<Vector>> cm_step_2_unconstrained(
    const DataMatrix& data, const Matrix& posteriors, const std::vector<Vector>& means,
    const MfaParams& params_prev) {
  std::vector<Matrix> loadings;
  const auto pieces = cm_step_2_pieces(data, posteriors, means, params_prev, loadings);
  std::vector<Vector> noise(pieces.size());
  for (std::size_t g = 0; g < pieces.size(); ++g)
    noise[g] = noise_from_loadings(pieces[g], loadings[g]);
  return {loadings, noise};
}

namespace {

// theta2-dependent part of the expected complete-data objective, negated:
// sum_g n_g sum_k (log psi_gk + V_kk(Lambda_g) / psi_gk); smaller is better
double q2_criterion(const std::vector<ScatterPieces>& pieces, const Matrix& posteriors,
                    const std::vector<Matrix>& loadings, const std::vector<Vector>& noise) {
  double crit = 0.0;
  for (std::size_t g = 0; g < pieces.size(); ++g) {
    const double n_g = posteriors.col(static_cast<int>(g)).sum();
    const Vector v = noise_from_loadings(pieces[g], loadings[g]);
    crit += n_g * (noise[g].array().log() + v.array() / noise[g].array()).sum();
  }
  return crit;
}

}  // namespace

std::pair<std::vector<Matrix>, std::vector<Vector>> cm_step_2(const DataMatrix& data,
                                                              const Matrix& posteriors,
                                                              const std::vector<Vector>& means,
                                                              const MfaParams& params_prev,
                                                              const ConstraintBounds& bounds) {
  std::vector<Matrix> loadings;
  const auto pieces = cm_step_2_pieces(data, posteriors, means, params_prev, loadings);

  const int G = static_cast<int>(posteriors.cols());
  Vector weights(G);
  double total = 0.0;
  for (int g = 0; g < G; ++g) {
    weights(g) = posteriors.col(g).sum();
    total += weights(g);
  }
  weights /= total;

  // project the loading spectra first; the noise update must see the final
  // loadings or the conditional maximization breaks
  loadings = enforce_loading_constraint(loadings, weights, bounds.c_load);
  std::vector<Vector> noise(G);
  for (int g = 0; g < G; ++g) noise[g] = noise_from_loadings(pieces[g], loadings[g]);
  noise = enforce_noise_constraint(noise, weights, bounds.c_noise);

  // Ascent guard. The spectrum truncation prices eigenvalue clamping like a
  // scatter problem and can land on loadings with a lower expected
  // complete-data objective than the previous feasible ones, which would
  // break the monotonicity of the whole cycle. Keeping the previous loadings
  // (with their conditionally optimal noise) dominates the previous state,
  // so take whichever candidate scores better. Only feasible previous
  // loadings are eligible; the output must satisfy the bounds regardless of
  // what the caller passed in.
  if (loading_eigenvalue_ratio(params_prev.loadings) <= bounds.c_load * (1.0 + 1e-8)) {
    std::vector<Vector> kept_noise(G);
    for (int g = 0; g < G; ++g)
      kept_noise[g] = noise_from_loadings(pieces[g], params_prev.loadings[g]);
    kept_noise = enforce_noise_constraint(kept_noise, weights, bounds.c_noise);
    if (q2_criterion(pieces, posteriors, params_prev.loadings, kept_noise) <
        q2_criterion(pieces, posteriors, loadings, noise))
      return {params_prev.loadings, kept_noise};
  }
  return {loadings, noise};
}

namespace detail {

void init_component(const Matrix& subsample, const Matrix& factors, Vector& mean_out,
                    Matrix& loadings_out, Vector& noise_out) {
  const int m = static_cast<int>(subsample.rows());
  const int p = static_cast<int>(subsample.cols());

  mean_out = subsample.colwise().mean().transpose();
  Matrix centered = subsample.rowwise() - mean_out.transpose();

  const Matrix utu = factors.transpose() * factors;
  Eigen::LLT<Matrix> llt(utu);
  if (llt.info() != Eigen::Success)
    throw NumericError("initialize: singular factor design");
  {
    // reject ill-conditioned draws as well
    const Vector diag = llt.matrixLLT().diagonal();
    if (diag.minCoeff() <= 1e-6 * diag.maxCoeff())
      throw NumericError("initialize: ill-conditioned factor design");
  }

  const Matrix coef = llt.solve(factors.transpose() * centered);  // d x p
  loadings_out = coef.transpose();

  const Matrix residual = centered - factors * coef;
  noise_out.resize(p);
  for (int k = 0; k < p; ++k) {
    const double mu = residual.col(k).mean();
    noise_out(k) = (residual.col(k).array() - mu).square().sum() / m;
  }
}

}  // namespace detail

MfaParams initialize(const DataMatrix& data, const FitConfig& config, Rng& rng) {
  const int n = data.n_rows();
  const int p = data.n_cols();
  const int G = config.n_components;
  const int d = config.n_factors;

  MfaParams params;
  params.weights.resize(G);
  params.means.resize(G);
  params.loadings.resize(G);
  params.noise_diag.resize(G);

  for (int g = 0; g < G; ++g) {
    const std::vector<int> idx = rng.sample_indices(n, p + 1);
    Matrix subsample(p + 1, p);
    for (int r = 0; r < p + 1; ++r) subsample.row(r) = data.values.row(idx[r]);

    bool done = false;
    for (int attempt = 0; attempt < 10 && !done; ++attempt) {
      const Matrix factors = rng.normal_matrix(p + 1, d);
      try {
        detail::init_component(subsample, factors, params.means[g], params.loadings[g],
                               params.noise_diag[g]);
        done = true;
      } catch (const NumericError&) {
        // fresh factor draw
      }
    }
    if (!done) throw NumericError("initialize: factor design stayed singular after 10 draws");
  }

  for (int g = 0; g < G; ++g) {
    const double u = 1.0 - rng.uniform01();
    params.weights(g) = -std::log(u);
  }
  params.weights /= params.weights.sum();

  const ConstraintReport report = check_constraints(params, config.bounds);
  if (!report.noise_ok)
    params.noise_diag =
        enforce_noise_constraint(params.noise_diag, params.weights, config.bounds.c_noise);
  if (!report.load_ok)
    params.loadings =
        enforce_loading_constraint(params.loadings, params.weights, config.bounds.c_load);
  return params;
}

FitResult fit_from(const DataMatrix& data, const FitConfig& config, MfaParams params,
                   int start_index, Exec exec) {
  const int n = data.n_rows();

  FitResult result;
  result.start_index = start_index;

  double prev_target = -std::numeric_limits<double>::infinity();
  std::vector<int> prev_kept;
  EStepResult final_es;
  bool have_final = false;
  int cycles = 0;

  for (int iter = 0; iter < config.max_iter; ++iter) {
    EStepResult es1 = e_step_trim(data, params, config.alpha, exec);
    result.target_trace.push_back(es1.target);

    const double denom = std::max(1.0, std::abs(es1.target));
    if (iter > 0 && std::abs(es1.target - prev_target) <= config.tol_target * denom &&
        es1.kept == prev_kept) {
      result.converged = true;
      final_es = std::move(es1);
      have_final = true;
      break;
    }
    prev_target = es1.target;
    prev_kept = es1.kept;

    auto [weights, means] = cm_step_1(data, es1.posteriors, config.alpha);
    MfaParams half = params;
    half.weights = weights;
    half.means = means;

    const EStepResult es2 = e_step_trim(data, half, config.alpha, exec);
    auto [loadings, noise] = cm_step_2(data, es2.posteriors, means, params, config.bounds);

    params = std::move(half);
    params.loadings = std::move(loadings);
    params.noise_diag = std::move(noise);
    ++cycles;
  }

  if (!have_final) {
    final_es = e_step_trim(data, params, config.alpha, exec);
    result.target_trace.push_back(final_es.target);
  }

  result.params = std::move(params);
  result.iterations = cycles;
  result.status = result.converged ? StartStatus::converged : StartStatus::max_iter_reached;
  result.target = final_es.target;
  result.posteriors = std::move(final_es.posteriors);

  result.trim_indicator.assign(n, 0);
  for (int i : final_es.kept) result.trim_indicator[i] = 1;

  result.labels.assign(n, kTrimmedLabel);
  for (int i : final_es.kept) {
    int best = 0;
    result.posteriors.row(i).maxCoeff(&best);
    result.labels[i] = best;
  }
  return result;
}

FitResult fit_once(const DataMatrix& data, const FitConfig& config, Rng& rng, int start_index,
                   Exec exec) {
  try {
    MfaParams initial = initialize(data, config, rng);
    return fit_from(data, config, std::move(initial), start_index, exec);
  } catch (const NumericError& e) {
    FitResult failed;
    failed.start_index = start_index;
    failed.status = StartStatus::failed;
    failed.failure_reason = e.what();
    failed.target = -std::numeric_limits<double>::infinity();
    return failed;
  }
}

FitResult fit(const DataMatrix& data, const FitConfig& config, Exec exec) {
  config.validate(data);

  std::vector<FitResult> results(config.n_starts);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < config.n_starts; ++k) {
      Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(k));
      results[k] = fit_once(data, config, rng, k, exec);
    }
  } else {
    for (int k = 0; k < config.n_starts; ++k) {
      Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(k));
      results[k] = fit_once(data, config, rng, k, exec);
    }
  }

  auto pick_best = [&](StartStatus wanted) {
    int best = -1;
    for (int k = 0; k < config.n_starts; ++k) {
      if (results[k].status != wanted) continue;
      if (best < 0 || results[k].target > results[best].target) best = k;
    }
    return best;
  };

  int best = pick_best(StartStatus::converged);
  if (best >= 0) return std::move(results[best]);

  best = pick_best(StartStatus::max_iter_reached);
  if (best >= 0) {
    results[best].best_was_nonconverged = true;
    return std::move(results[best]);
  }

  std::string reasons = "fit: all starts failed:";
  for (const auto& r : results) reasons += " [" + r.failure_reason + "]";
  throw NumericError(reasons);
}

std::vector<int> classify_trimmed(const DataMatrix& data, const FitResult& result) {
  std::vector<int> labels = result.labels;
  const auto kernels = build_kernels(result.params);
  const int G = result.params.n_components();
  for (int i = 0; i < data.n_rows(); ++i) {
    if (labels[i] != kTrimmedLabel) continue;
    const Vector x = data.values.row(i).transpose();
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int g = 0; g < G; ++g) {
      const double s = std::log(result.params.weights(g)) + kernels[g].log_density(x);
      if (s > best_score) {
        best_score = s;
        best = g;
      }
    }
    labels[i] = best;
  }
  return labels;
}

double trimmed_log_likelihood(const DataMatrix& data, const MfaParams& params, double alpha) {
  return e_step_trim(data, params, alpha, Exec::serial).target;
}

}  // namespace tmfa
