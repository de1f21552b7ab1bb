#ifndef TMFA_EVAL_HPP
#define TMFA_EVAL_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tmfa/aecm.hpp"
#include "tmfa/datagen.hpp"
#include "tmfa/types.hpp"

namespace tmfa {

// Fraction of erroneously handled points, minimized over relabelings of the
// predicted clusters. A clean point is correct when its relabeled cluster
// matches the generating component; a contaminated point (noise or pointwise
// truth flag) is correct only when it was trimmed. Exhaustive permutation
// search for G <= 8, assignment-problem matching above that.
double misclassification_error(const std::vector<int>& predicted, const std::vector<int>& truth);

// Minimum-cost assignment for a square cost matrix (Hungarian method);
// returns the column assigned to each row.
std::vector<int> solve_assignment(const Matrix& cost);

struct AlignResult {
  MfaParams params;        // permuted, loadings Procrustes-rotated onto the truth
  std::vector<int> perm;   // perm[g] = index in the estimate matched to truth g
  double worst_mean_dist = 0.0;
  bool ok = true;
};

// Matches estimated components to the truth by the permutation minimizing the
// total mean distance, then rotates each loading matrix onto the truth gauge.
// `max_mean_dist` only guards against absurd fits; by default effectively off
// so that badly contaminated estimates still enter the aggregates.
AlignResult align_to_truth(const MfaParams& estimate, const MfaParams& truth,
                           double max_mean_dist = 1e9);

// Per-block summaries over repetitions. Estimates must be aligned already.
// bias: mean absolute coordinate bias of the block; mse: mean squared error
// of the block vector (equals trace of the covariance plus squared bias).
// Keys: pi_g, mu_g, psi_g, lambda_g (Procrustes gauge) and lamlamt_g
// (gauge-free Lambda Lambda' distance), 1-based g.
struct BiasMse {
  std::map<std::string, double> bias;
  std::map<std::string, double> mse;
};
BiasMse bias_mse(const std::vector<MfaParams>& aligned_estimates, const MfaParams& truth);

struct ExperimentReport {
  double eta_mean = 0.0;
  std::map<std::string, double> bias;
  std::map<std::string, double> mse;
  int repetitions = 0;
  int excluded = 0;

  struct RepRecord {
    double eta = 0.0;
    double target = 0.0;
    bool converged = false;
    bool excluded = false;
    std::string note;
    MfaParams aligned;  // empty when excluded
  };
  std::vector<RepRecord> reps;
};

// Monte-Carlo loop: generate the scenario, fit, score eta against the
// generating labels, align and accumulate parameter statistics. Repetition r
// uses scenario seed mix64(mix64(seed) + 2r) and fit seed
// mix64(mix64(seed) + 2r + 1); given the same seed the report is identical.
ExperimentReport run_experiment(const ScenarioSpec& scenario, const FitConfig& config,
                                int repetitions, std::uint64_t seed, Exec exec = Exec::parallel);

}  // namespace tmfa

#endif
