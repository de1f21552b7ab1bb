#include "tmfa/lowrank_gauss.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace tmfa {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kRcondFloor = 1e-12;
}  // namespace

ComponentKernel::ComponentKernel(Vector mean, Matrix loadings, Vector noise_diag)
    : mean_(std::move(mean)), loadings_(std::move(loadings)), noise_diag_(std::move(noise_diag)) {
  const int p = static_cast<int>(mean_.size());
  const int d = static_cast<int>(loadings_.cols());
  if (loadings_.rows() != p || noise_diag_.size() != p)
    throw std::invalid_argument("ComponentKernel: inconsistent shapes");
  if ((noise_diag_.array() <= 0.0).any() || !noise_diag_.allFinite())
    throw NumericError("ComponentKernel: noise diagonal must be positive and finite");

  inv_noise_ = noise_diag_.cwiseInverse();
  psi_inv_loadings_ = inv_noise_.asDiagonal() * loadings_;

  const double log_det_psi = noise_diag_.array().log().sum();

  if (d == 0) {
    gamma_ = Matrix::Zero(0, p);
    residual_cov_ = Matrix::Zero(0, 0);
    log_det_sigma_ = log_det_psi;
  } else {
    Matrix m = Matrix::Identity(d, d) + loadings_.transpose() * psi_inv_loadings_;
    if (!m.allFinite()) throw NumericError("ComponentKernel: inner matrix not finite");

    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    const double emin = es.eigenvalues().minCoeff();
    const double emax = es.eigenvalues().maxCoeff();
    if (!(emin > 0.0) || emin / emax < kRcondFloor)
      throw NumericError("ComponentKernel: inner matrix numerically singular");

    llt_m_.compute(m);
    if (llt_m_.info() != Eigen::Success)
      throw NumericError("ComponentKernel: Cholesky of inner matrix failed");

    double log_det_m = 0.0;
    for (int k = 0; k < d; ++k) log_det_m += std::log(llt_m_.matrixLLT()(k, k));
    log_det_m *= 2.0;
    log_det_sigma_ = log_det_m + log_det_psi;

    // gamma = M^{-1} Lambda' Psi^{-1} equals Lambda' Sigma^{-1}
    gamma_ = llt_m_.solve(psi_inv_loadings_.transpose());
    residual_cov_ = llt_m_.solve(Matrix::Identity(d, d));
    residual_cov_ = 0.5 * (residual_cov_ + residual_cov_.transpose()).eval();
  }

  norm_const_ = -0.5 * p * kLog2Pi - 0.5 * log_det_sigma_;
}

double ComponentKernel::log_density(const Vector& x) const {
  const Vector r = x - mean_;
  double quad = r.cwiseProduct(inv_noise_).dot(r);
  if (factors() > 0) {
    Vector t = psi_inv_loadings_.transpose() * r;
    llt_m_.matrixL().solveInPlace(t);
    quad -= t.squaredNorm();
  }
  return norm_const_ - 0.5 * quad;
}

void ComponentKernel::log_density_block(const Eigen::Ref<const Matrix>& x_block,
                                        Eigen::Ref<Vector> out) const {
  const Matrix centered = x_block.rowwise() - mean_.transpose();
  Vector quad = centered.array().square().matrix() * inv_noise_;
  if (factors() > 0) {
    Matrix t = centered * psi_inv_loadings_;  // rows are Lambda' Psi^-1 r
    llt_m_.matrixL().transpose().solveInPlace<Eigen::OnTheRight>(t);
    quad -= t.rowwise().squaredNorm();
  }
  out = (-0.5 * quad).array() + norm_const_;
}

double ComponentKernel::log_density_dense(const Vector& x) const {
  const int p = dim();
  Matrix sigma = loadings_ * loadings_.transpose();
  sigma.diagonal() += noise_diag_;
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw NumericError("log_density_dense: covariance not positive definite");
  double log_det = 0.0;
  for (int k = 0; k < p; ++k) log_det += std::log(llt.matrixLLT()(k, k));
  log_det *= 2.0;
  const Vector u = llt.matrixL().solve(x - mean_);
  return -0.5 * p * kLog2Pi - 0.5 * log_det - 0.5 * u.squaredNorm();
}

Matrix ComponentKernel::xi_matrix(const Vector& x, const Vector& mu) const {
  const Vector gr = gamma_ * (x - mu);
  return residual_cov_ + gr * gr.transpose();
}

std::pair<Matrix, Matrix> factor_projection(const ComponentKernel& k) {
  return {k.gamma(), k.residual_cov()};
}

std::vector<ComponentKernel> build_kernels(const MfaParams& params) {
  std::vector<ComponentKernel> kernels;
  kernels.reserve(params.n_components());
  for (int g = 0; g < params.n_components(); ++g)
    kernels.emplace_back(params.means[g], params.loadings[g], params.noise_diag[g]);
  return kernels;
}

Matrix score_matrix(const DataMatrix& data, const MfaParams& params, Exec exec) {
  return score_matrix(data, build_kernels(params), params.weights, exec);
}

Matrix score_matrix(const DataMatrix& data, const std::vector<ComponentKernel>& kernels,
                    const Vector& weights, Exec exec) {
  const int n = data.n_rows();
  const int G = static_cast<int>(kernels.size());
  Vector log_w(G);
  for (int g = 0; g < G; ++g) log_w(g) = std::log(weights(g));

  // fixed blocking in both paths so serial and parallel results match bit
  // for bit; blocks are independent and the work inside is vectorized
  constexpr int kBlock = 1024;
  const int n_blocks = (n + kBlock - 1) / kBlock;

  Matrix scores(n, G);
  auto process = [&](int b) {
    const int b0 = b * kBlock;
    const int len = std::min(kBlock, n - b0);
    for (int g = 0; g < G; ++g) {
      kernels[g].log_density_block(data.values.middleRows(b0, len),
                                   scores.col(g).segment(b0, len));
      scores.col(g).segment(b0, len).array() += log_w(g);
    }
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int b = 0; b < n_blocks; ++b) process(b);
  } else {
    for (int b = 0; b < n_blocks; ++b) process(b);
  }
  return scores;
}

double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf (or a nan propagates)
  double s = 0.0;
  for (int g = 0; g < v.size(); ++g) s += std::exp(v(g) - m);
  return m + std::log(s);
}

}  // namespace tmfa
