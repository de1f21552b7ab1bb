#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "helpers.hpp"
#include "tmfa/datagen.hpp"
#include "tmfa/model.hpp"

using namespace tmfa;
using tmfa::testing::naive_covariance;
using tmfa::testing::random_params;

TEST_CASE("component_covariance: zero loadings give the noise diagonal") {
  MfaParams params;
  params.weights = Vector::Constant(1, 1.0);
  params.means = {Vector::Zero(5)};
  params.loadings = {Matrix::Zero(5, 2)};
  params.noise_diag = {Vector::Constant(5, 0.1)};
  const Matrix sigma = component_covariance(params, 0);
  CHECK((sigma - 0.1 * Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("component_covariance matches the benchmark truth block") {
  const MfaParams truth = builtin_mixture_truth();
  const Matrix sigma1 = component_covariance(truth, 0);
  CHECK(sigma1(0, 0) == doctest::Approx(1.35).epsilon(1e-14));  // 0.5^2 + 1.0^2 + 0.1
  CHECK((sigma1 - sigma1.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("component_covariance agrees with the triple loop") {
  Rng rng(5);
  for (int t = 0; t < 30; ++t) {
    const MfaParams params = random_params(rng, 2, 6, 2);
    for (int g = 0; g < 2; ++g) {
      const Matrix a = component_covariance(params, g);
      const Matrix b = naive_covariance(params.loadings[g], params.noise_diag[g]);
      CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("component_covariance eigenvalues stay above min psi") {
  Rng rng(6);
  for (int t = 0; t < 30; ++t) {
    const MfaParams params = random_params(rng, 1, 7, 3);
    Eigen::SelfAdjointEigenSolver<Matrix> es(component_covariance(params, 0));
    CHECK(es.eigenvalues().minCoeff() >= params.noise_diag[0].minCoeff() - 1e-10);
  }
}

TEST_CASE("check_constraints on the benchmark truth") {
  const MfaParams truth = builtin_mixture_truth();

  SUBCASE("noise ratio is 4") {
    CHECK(check_constraints(truth, {5.0, 1e10}).ok());
    const auto report = check_constraints(truth, {3.0, 1e10});
    CHECK_FALSE(report.ok());
    CHECK(report.noise_ratio == doctest::Approx(4.0));
  }

  SUBCASE("loading eigenvalue ratio is about 2.471") {
    const auto report = check_constraints(truth, {5.0, 3.0});
    CHECK(report.ok());
    CHECK(report.load_ratio == doctest::Approx(2.471).epsilon(1e-3));
    CHECK_FALSE(check_constraints(truth, {5.0, 2.4}).ok());

    // cross-check the ratio with a dense eigensolver on Lambda Lambda'
    double lo = 1e300, hi = 0.0;
    for (int g = 0; g < 3; ++g) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(
          Matrix(truth.loadings[g] * truth.loadings[g].transpose()));
      const auto& ev = es.eigenvalues();
      for (int k = static_cast<int>(ev.size()) - 2; k < ev.size(); ++k) {
        lo = std::min(lo, ev(k));
        hi = std::max(hi, ev(k));
      }
    }
    CHECK(report.load_ratio == doctest::Approx(hi / lo).epsilon(1e-9));
  }
}

TEST_CASE("check_constraints trivial properties") {
  Rng rng(17);
  for (int t = 0; t < 40; ++t) {
    MfaParams params = random_params(rng, 3, 5, 2);

    // huge bounds always pass
    CHECK(check_constraints(params, {1e12, 1e12}).ok());

    // equal psi entries always pass the noise side
    for (auto& psi : params.noise_diag) psi.setConstant(0.3);
    CHECK(check_constraints(params, {1.0, 1e12}).noise_ok);

    // joint rescale leaves the verdict unchanged
    const ConstraintBounds bounds{2.5, 4.0};
    const auto before = check_constraints(params, bounds);
    const double s = std::exp(rng.uniform(-6, 6));
    for (auto& psi : params.noise_diag) psi *= s;
    for (auto& l : params.loadings) l *= std::sqrt(s);
    const auto after = check_constraints(params, bounds);
    CHECK(before.ok() == after.ok());
    CHECK(before.noise_ok == after.noise_ok);
    CHECK(before.load_ok == after.load_ok);
  }
}

TEST_CASE("parameter_count") {
  CHECK(parameter_count(6, 2, 3) == 71);
  CHECK(parameter_count(2, 1, 1) == 6);
  CHECK(parameter_count(11, 6, 2) == 147);
}
