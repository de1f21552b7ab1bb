#include "tmfa/model.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/SVD>

namespace tmfa {

Matrix component_covariance(const MfaParams& params, int g) {
  const Matrix& lambda = params.loadings.at(g);
  Matrix sigma = lambda * lambda.transpose();
  sigma.diagonal() += params.noise_diag.at(g);
  return sigma;
}

ConstraintReport check_constraints(const MfaParams& params, const ConstraintBounds& bounds,
                                   double tol) {
  bounds.validate();
  ConstraintReport report;
  const int G = params.n_components();

  double psi_min = std::numeric_limits<double>::infinity();
  double psi_max = 0.0;
  for (int g = 0; g < G; ++g) {
    psi_min = std::min(psi_min, params.noise_diag[g].minCoeff());
    psi_max = std::max(psi_max, params.noise_diag[g].maxCoeff());
  }
  if (psi_max <= 0.0 || psi_min <= 0.0) {
    report.noise_ratio = std::numeric_limits<double>::infinity();
    report.noise_ok = false;
  } else {
    report.noise_ratio = psi_max / psi_min;
    report.noise_ok = report.noise_ratio <= bounds.c_noise * (1.0 + tol);
  }

  report.load_ratio = loading_eigenvalue_ratio(params.loadings);
  report.load_ok = report.load_ratio <= bounds.c_load * (1.0 + tol);
  return report;
}

double loading_eigenvalue_ratio(const std::vector<Matrix>& loadings) {
  std::vector<double> eigs;
  double eig_max = 0.0;
  for (const Matrix& lambda : loadings) {
    Eigen::JacobiSVD<Matrix> svd(lambda);
    const Vector& sv = svd.singularValues();
    for (int k = 0; k < sv.size(); ++k) {
      eigs.push_back(sv(k) * sv(k));
      eig_max = std::max(eig_max, eigs.back());
    }
  }
  double eig_min = std::numeric_limits<double>::infinity();
  for (double e : eigs)
    if (e > eig_max * 1e-12) eig_min = std::min(eig_min, e);
  if (eig_max == 0.0 || !std::isfinite(eig_min)) return 1.0;  // nothing to compare
  return eig_max / eig_min;
}

long parameter_count(int p, int d, int G) {
  if (d >= p || d < 0 || p < 1 || G < 1) throw std::invalid_argument("parameter_count: need 0 <= d < p, G >= 1");
  const long lp = p, ld = d, lg = G;
  return (lg - 1) + lg * lp + lg * (lp * ld - ld * (ld - 1) / 2) + lg * lp;
}

}  // namespace tmfa
