#ifndef TMFA_LOWRANK_GAUSS_HPP
#define TMFA_LOWRANK_GAUSS_HPP

#include <utility>
#include <vector>

#include <Eigen/Cholesky>

#include "tmfa/types.hpp"

namespace tmfa {

// Gaussian density kernel for a covariance of the form
//   Sigma = Lambda Lambda' + diag(psi),  Lambda p x d, d << p.
//
// Evaluation goes through the Woodbury identity and the matrix determinant
// lemma on the d x d inner matrix M = I_d + Lambda' Psi^{-1} Lambda, so a
// single log-density costs O(p d + d^2) after O(p d^2) setup and Sigma is
// never formed. A dense O(p^3) path is kept as the reference implementation
// (log_density_dense) and used by the test oracles.
//
// Immutable after construction; evaluation over many points is safe to run
// concurrently as long as each caller owns its input vector.
class ComponentKernel {
 public:
  // Throws NumericError when M is numerically singular (reciprocal condition
  // below 1e-12), which signals degenerate noise entries.
  ComponentKernel(Vector mean, Matrix loadings, Vector noise_diag);

  double log_density(const Vector& x) const;

  // Vectorized evaluation of a block of observations (rows of X); writes one
  // value per row. This is the kernel behind score_matrix.
  void log_density_block(const Eigen::Ref<const Matrix>& x_block,
                         Eigen::Ref<Vector> out) const;

  // Dense reference: forms Sigma explicitly and uses its Cholesky factor.
  double log_density_dense(const Vector& x) const;

  // gamma = Lambda' Sigma^{-1} (d x p); maps centered observations to
  // posterior factor means. residual_cov = I_d - gamma Lambda = M^{-1}.
  const Matrix& gamma() const { return gamma_; }
  const Matrix& residual_cov() const { return residual_cov_; }

  // I_d - gamma Lambda + gamma (x - mu)(x - mu)' gamma'
  Matrix xi_matrix(const Vector& x, const Vector& mu) const;
  Matrix xi_matrix(const Vector& x) const { return xi_matrix(x, mean_); }

  double log_det_sigma() const { return log_det_sigma_; }
  const Vector& mean() const { return mean_; }
  const Matrix& loadings() const { return loadings_; }
  const Vector& noise_diag() const { return noise_diag_; }
  int dim() const { return static_cast<int>(mean_.size()); }
  int factors() const { return static_cast<int>(loadings_.cols()); }

 private:
  Vector mean_;
  Matrix loadings_;
  Vector noise_diag_;
  Vector inv_noise_;
  Matrix psi_inv_loadings_;      // Psi^{-1} Lambda
  Eigen::LLT<Matrix> llt_m_;     // Cholesky of M
  Matrix gamma_;
  Matrix residual_cov_;
  double log_det_sigma_ = 0.0;
  double norm_const_ = 0.0;      // -p/2 log(2 pi) - 1/2 log det Sigma
};

// Spec-level free functions.
inline double log_density(const ComponentKernel& k, const Vector& x) { return k.log_density(x); }
std::pair<Matrix, Matrix> factor_projection(const ComponentKernel& k);
inline Matrix xi_matrix(const ComponentKernel& k, const Vector& x, const Vector& mu) {
  return k.xi_matrix(x, mu);
}

std::vector<ComponentKernel> build_kernels(const MfaParams& params);

// n x G matrix of log(pi_g phi_p(x_i; mu_g, Sigma_g)). Rows are independent,
// so the parallel path is bit-identical to the serial one.
Matrix score_matrix(const DataMatrix& data, const MfaParams& params, Exec exec = Exec::parallel);
Matrix score_matrix(const DataMatrix& data, const std::vector<ComponentKernel>& kernels,
                    const Vector& weights, Exec exec = Exec::parallel);

// log sum_g exp(v_g), -inf safe
double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& v);

}  // namespace tmfa

#endif
