#ifndef TMFA_AECM_HPP
#define TMFA_AECM_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tmfa/rng.hpp"
#include "tmfa/types.hpp"

namespace tmfa {

// label value used for trimmed observations
inline constexpr int kTrimmedLabel = -1;

struct FitConfig {
  int n_components = 1;
  int n_factors = 1;
  double alpha = 0.0;           // trimming level in [0, 1)
  ConstraintBounds bounds;
  int n_starts = 10;
  int max_iter = 200;
  double tol_target = 1e-8;     // relative target change for convergence
  std::uint64_t seed = 0;

  void validate(const DataMatrix& data) const;
};

enum class StartStatus { converged, max_iter_reached, failed };

struct FitResult {
  MfaParams params;
  std::vector<int> trim_indicator;  // 1 = kept, 0 = trimmed; sums to floor(n(1-alpha))
  Matrix posteriors;                // n x G, zero rows for trimmed points
  std::vector<int> labels;          // argmax posterior, or kTrimmedLabel
  double target = 0.0;              // trimmed log-likelihood at params
  int iterations = 0;
  bool converged = false;
  int start_index = 0;
  StartStatus status = StartStatus::failed;
  std::string failure_reason;
  std::vector<double> target_trace;     // target after each full cycle
  bool best_was_nonconverged = false;   // set by fit() when no start converged
};

// Number of observations kept by trimming, floor(n (1 - alpha)). A small
// epsilon shields the floor from representation error in n * (1 - alpha).
int trim_keep_count(int n, double alpha);

// Concentration E-step: per-point component scores, retention of the
// trim_keep_count points with the largest mixture density (ties resolved by
// keeping the smaller index) and posterior responsibilities for those points.
struct EStepResult {
  std::vector<int> kept;   // ascending kept indices
  Matrix posteriors;       // n x G
  Vector target_terms;     // log D_i for kept points, 0 otherwise
  double target = 0.0;     // sum of kept log D_i
};

EStepResult e_step_trim(const DataMatrix& data, const MfaParams& params, double alpha,
                        Exec exec = Exec::parallel);

// First-cycle CM step: weight and mean updates from the responsibilities.
// Throws NumericError when a component loses all mass.
std::pair<Vector, std::vector<Vector>> cm_step_1(const DataMatrix& data, const Matrix& posteriors,
                                                 double alpha);

// Second-cycle CM step: per-component scatter S_g, factor regression through
// the previous cycle's (Lambda, Psi), then the constraint projections
// (loadings first, then noise).
std::pair<std::vector<Matrix>, std::vector<Vector>> cm_step_2(const DataMatrix& data,
                                                              const Matrix& posteriors,
                                                              const std::vector<Vector>& means,
                                                              const MfaParams& params_prev,
                                                              const ConstraintBounds& bounds);

// The raw update before constraint projection; exposed for tests.
std::pair<std::vector<Matrix>, std::vector<Vector>> cm_step_2_unconstrained(
    const DataMatrix& data, const Matrix& posteriors, const std::vector<Vector>& means,
    const MfaParams& params_prev);

// Random-subsample initialization: p+1 rows per component, loadings by
// regression on synthetic standard-normal factors, noise from the residual
// column variances, weights uniform on the simplex. The result is projected
// into the constrained space if it falls outside.
MfaParams initialize(const DataMatrix& data, const FitConfig& config, Rng& rng);

// One complete AECM run from a given initial value.
FitResult fit_from(const DataMatrix& data, const FitConfig& config, MfaParams initial,
                   int start_index = 0, Exec exec = Exec::parallel);

// initialize + fit_from. Numeric degeneracies abort the start: the result
// comes back with status == failed instead of throwing.
FitResult fit_once(const DataMatrix& data, const FitConfig& config, Rng& rng, int start_index = 0,
                   Exec exec = Exec::parallel);

// Multistart driver. Start k runs on Rng::substream(config.seed, k); starts
// may execute in parallel and the selection is a deterministic reduction
// (best converged target, ties to the smaller start index). Throws
// NumericError when every start fails.
FitResult fit(const DataMatrix& data, const FitConfig& config, Exec exec = Exec::parallel);

// Bayes-rule assignment of the trimmed points at the fitted parameters;
// labels of kept points are unchanged.
std::vector<int> classify_trimmed(const DataMatrix& data, const FitResult& result);

// Trimmed log-likelihood of given parameters (concentration trim set).
double trimmed_log_likelihood(const DataMatrix& data, const MfaParams& params, double alpha);

namespace detail {
// Initialization of one component from a fixed subsample and factor draw;
// the seam used by initialize() and by tests.
void init_component(const Matrix& subsample, const Matrix& factors, Vector& mean_out,
                    Matrix& loadings_out, Vector& noise_out);
}  // namespace detail

}  // namespace tmfa

#endif
