#include "tmfa/types.hpp"

#include <cmath>

namespace tmfa {

void MfaParams::validate() const {
  const int g_count = n_components();
  if (g_count < 1) throw std::invalid_argument("MfaParams: at least one component required");
  if (static_cast<int>(means.size()) != g_count || static_cast<int>(loadings.size()) != g_count ||
      static_cast<int>(noise_diag.size()) != g_count)
    throw std::invalid_argument("MfaParams: per-component blocks must all have G entries");

  double wsum = 0.0;
  for (int g = 0; g < g_count; ++g) {
    if (!(weights(g) > 0.0 && weights(g) < 1.0) && g_count > 1)
      throw std::invalid_argument("MfaParams: weights must lie in (0,1)");
    if (g_count == 1 && !(weights(g) > 0.0 && weights(g) <= 1.0))
      throw std::invalid_argument("MfaParams: weight must be positive");
    wsum += weights(g);
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw std::invalid_argument("MfaParams: weights must sum to 1 within 1e-12");

  const int p = n_vars();
  const int d = n_factors();
  if (d >= p) throw std::invalid_argument("MfaParams: requires d < p");
  for (int g = 0; g < g_count; ++g) {
    if (means[g].size() != p || loadings[g].rows() != p || loadings[g].cols() != d ||
        noise_diag[g].size() != p)
      throw std::invalid_argument("MfaParams: inconsistent shapes across components");
    if (!means[g].allFinite() || !loadings[g].allFinite() || !noise_diag[g].allFinite())
      throw std::invalid_argument("MfaParams: non-finite entries");
    if ((noise_diag[g].array() <= 0.0).any())
      throw std::invalid_argument("MfaParams: noise diagonals must be strictly positive");
  }
}

void ConstraintBounds::validate() const {
  if (!(c_noise >= 1.0) || !std::isfinite(c_noise))
    throw std::invalid_argument("ConstraintBounds: c_noise must be finite and >= 1");
  if (!(c_load >= 1.0) || !std::isfinite(c_load))
    throw std::invalid_argument("ConstraintBounds: c_load must be finite and >= 1");
}

void DataMatrix::validate() const {
  if (values.rows() < 1 || values.cols() < 1)
    throw std::invalid_argument("DataMatrix: empty matrix");
  if (!values.allFinite())
    throw std::invalid_argument("DataMatrix: non-finite entries");
  if (!column_names.empty() && static_cast<int>(column_names.size()) != n_cols())
    throw std::invalid_argument("DataMatrix: column_names must be empty or match p");
}

}  // namespace tmfa
