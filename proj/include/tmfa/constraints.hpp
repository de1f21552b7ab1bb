#ifndef TMFA_CONSTRAINTS_HPP
#define TMFA_CONSTRAINTS_HPP

#include <vector>

#include "tmfa/types.hpp"

namespace tmfa {

// Weighted truncation problem: given nonnegative values v_{gk} tagged with
// their component g, component weights pi_g and a ratio bound c, find the
// threshold m minimizing
//   f(m) = sum_g pi_g sum_k ( log [v_gk]_m + v_gk / [v_gk]_m )
// where [v]_m = min(c m, max(v, m)) clamps every value into [m, c m].
struct TruncationProblem {
  struct Entry {
    int group;
    double value;
  };
  std::vector<Entry> values;
  Vector group_weights;
  double ratio_bound = 1.0;

  void validate() const;
};

double truncate_value(double v, double m, double c);

double truncation_objective(const TruncationProblem& problem, double m);

// Global minimizer of the objective. Piecewise analysis: between consecutive
// breakpoints {v_gk} and {v_gk / c} the clamp pattern is fixed and the
// stationary point has the closed form
//   m* = (sum_low w v + sum_high w v / c) / (sum_low w + sum_high w),
// so it suffices to evaluate the objective at one candidate per interval.
// Throws NumericError when every value is zero.
double optimal_threshold(const TruncationProblem& problem);

// Joint projection of the loading spectra: eigendecompose each
// Lambda_g Lambda_g' (via the SVD of Lambda_g), clamp the top-d eigenvalues
// at the jointly optimal threshold and rebuild Lambda_g in the canonical
// gauge U diag(sqrt(e)). Output satisfies the c_load ratio bound; the
// products Lambda Lambda' of already-feasible inputs are preserved.
std::vector<Matrix> enforce_loading_constraint(const std::vector<Matrix>& loadings,
                                               const Vector& weights, double c_load);

// Entrywise clamp of the noise diagonals at the jointly optimal threshold;
// entries already inside [m_opt, c_noise m_opt] come back unchanged.
std::vector<Vector> enforce_noise_constraint(const std::vector<Vector>& noise_diags,
                                             const Vector& weights, double c_noise);

}  // namespace tmfa

#endif
