#ifndef TMFA_TYPES_HPP
#define TMFA_TYPES_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace tmfa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Numeric degeneracy during estimation (singular inner matrix, empty
// component, collapsed densities). The multistart driver treats this as
// "abort the current start", not as a programming error.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Exec { serial, parallel };

// Full parameter vector of a G-component Gaussian factor-analyzer mixture:
// mixing weights pi_g, means mu_g (p), loadings Lambda_g (p x d) and the
// diagonals psi_g of the noise matrices Psi_g. Component covariance is
// Lambda_g Lambda_g' + diag(psi_g).
struct MfaParams {
  Vector weights;                   // G
  std::vector<Vector> means;        // G entries, each p
  std::vector<Matrix> loadings;     // G entries, each p x d
  std::vector<Vector> noise_diag;   // G entries, each p, strictly positive

  int n_components() const { return static_cast<int>(weights.size()); }
  int n_vars() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }
  int n_factors() const { return loadings.empty() ? 0 : static_cast<int>(loadings[0].cols()); }

  void validate() const;
};

// Ratio bounds on the scatter parameters, shared across all components:
//   max psi / min psi <= c_noise   over all coordinates and components,
//   max eig / min eig <= c_load    over the top-d eigenvalues of
//                                  Lambda_g Lambda_g' of all components.
// "Virtually unconstrained" is a large finite value such as 1e10.
struct ConstraintBounds {
  double c_noise = 1e10;
  double c_load = 1e10;

  void validate() const;
};

struct DataMatrix {
  Matrix values;  // n x p
  std::vector<std::string> column_names;  // empty or exactly p names

  int n_rows() const { return static_cast<int>(values.rows()); }
  int n_cols() const { return static_cast<int>(values.cols()); }

  void validate() const;
};

}  // namespace tmfa

#endif
