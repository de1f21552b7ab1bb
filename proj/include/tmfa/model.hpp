#ifndef TMFA_MODEL_HPP
#define TMFA_MODEL_HPP

#include "tmfa/types.hpp"

namespace tmfa {

// Lambda_g Lambda_g' + diag(psi_g), symmetric positive definite.
Matrix component_covariance(const MfaParams& params, int g);

struct ConstraintReport {
  bool noise_ok = true;
  bool load_ok = true;
  double noise_ratio = 1.0;  // max psi / min psi over all components
  double load_ratio = 1.0;   // max/min over the positive top-d eigenvalues of all Lambda Lambda'

  bool ok() const { return noise_ok && load_ok; }
};

// Ratio checks against the bounds, with relative slack tol. Eigenvalues of
// Lambda_g Lambda_g' are taken as the squared singular values of Lambda_g;
// values that vanish relative to the global maximum do not enter the min
// (rank-deficient loadings are handled by truncation, not rejection).
ConstraintReport check_constraints(const MfaParams& params, const ConstraintBounds& bounds,
                                   double tol = 1e-8);

// max/min over the positive loading eigenvalues of all components, with the
// same rank-deficiency treatment as check_constraints; 1 when all are zero
double loading_eigenvalue_ratio(const std::vector<Matrix>& loadings);

// Free parameters of the model: (G-1) weights, G*p means, loadings with the
// usual d(d-1)/2 rotational identification correction, G*p noise entries.
long parameter_count(int p, int d, int G);

}  // namespace tmfa

#endif
