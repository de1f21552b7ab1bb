#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "tmfa/aecm.hpp"
#include "tmfa/datagen.hpp"

using namespace tmfa;

TEST_CASE("builtin truth passes its own invariants") {
  const MfaParams truth = builtin_mixture_truth();
  truth.validate();
  CHECK(truth.n_components() == 3);
  CHECK(truth.n_vars() == 6);
  CHECK(truth.n_factors() == 2);
  CHECK_THROWS_AS(builtin_mixture_truth("nope"), std::invalid_argument);
}

TEST_CASE("sample_mixture moments for a spherical single component") {
  MfaParams truth;
  truth.weights = Vector::Constant(1, 1.0);
  truth.means = {Vector::Constant(3, 2.0)};
  truth.loadings = {Matrix::Zero(3, 1)};
  truth.noise_diag = {Vector::Constant(3, 0.25)};

  Rng rng(1);
  const int n = 100000;
  auto [data, labels] = sample_mixture(truth, n, rng);

  // 5 sigma Monte-Carlo bands
  const double mean_band = 5.0 * std::sqrt(0.25 / n);
  const Vector mean = data.values.colwise().mean().transpose();
  for (int k = 0; k < 3; ++k) CHECK(std::abs(mean(k) - 2.0) < mean_band);

  const double var_band = 5.0 * 0.25 * std::sqrt(2.0 / n);
  for (int k = 0; k < 3; ++k) {
    const double var = (data.values.col(k).array() - mean(k)).square().sum() / n;
    CHECK(std::abs(var - 0.25) < var_band);
  }
}

TEST_CASE("sample_mixture covariance matches the truth for component 1") {
  const MfaParams truth = builtin_mixture_truth();
  Rng rng(2);
  const int n = 30000;
  auto [data, labels] = sample_mixture(truth, n, rng);

  int count = 0;
  Vector mean = Vector::Zero(6);
  for (int i = 0; i < n; ++i)
    if (labels[i] == 0) {
      mean += data.values.row(i).transpose();
      ++count;
    }
  REQUIRE(count > 5000);
  mean /= count;

  Matrix cov = Matrix::Zero(6, 6);
  for (int i = 0; i < n; ++i)
    if (labels[i] == 0) {
      const Vector r = data.values.row(i).transpose() - mean;
      cov += r * r.transpose();
    }
  cov /= count;

  const Matrix sigma1 = testing::naive_covariance(truth.loadings[0], truth.noise_diag[0]);
  // Frobenius band ~ 5 * ||Sigma|| sqrt(2/count)
  CHECK((cov - sigma1).norm() < 5.0 * sigma1.norm() * std::sqrt(2.0 / count));

  // weights land near (0.3, 0.4, 0.3)
  CHECK(std::abs(static_cast<double>(count) / n - 0.3) < 5.0 * std::sqrt(0.3 * 0.7 / n));
}

TEST_CASE("sample_mixture is seed deterministic") {
  const MfaParams truth = builtin_mixture_truth();
  Rng r1 = Rng::substream(33, 0);
  Rng r2 = Rng::substream(33, 0);
  auto [d1, l1] = sample_mixture(truth, 50, r1);
  auto [d2, l2] = sample_mixture(truth, 50, r2);
  CHECK(l1 == l2);
  CHECK((d1.values - d2.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("add_uniform_noise") {
  const MfaParams truth = builtin_mixture_truth();
  Rng rng(3);
  auto [clean, labels] = sample_mixture(truth, 150, rng);

  SUBCASE("zero count leaves the data untouched") {
    auto [data, flags] = add_uniform_noise(clean, 0, 0.1, rng);
    CHECK(data.n_rows() == 150);
    CHECK(flags.empty());
  }

  SUBCASE("zero expansion stays inside the bounding box") {
    const Vector lo = clean.values.colwise().minCoeff().transpose();
    const Vector hi = clean.values.colwise().maxCoeff().transpose();
    auto [data, flags] = add_uniform_noise(clean, 200, 0.0, rng);
    for (int i = 150; i < data.n_rows(); ++i)
      for (int k = 0; k < 6; ++k) {
        CHECK(data.values(i, k) >= lo(k));
        CHECK(data.values(i, k) <= hi(k));
      }
  }

  SUBCASE("default expansion respects the widened box") {
    const Vector lo = clean.values.colwise().minCoeff().transpose();
    const Vector hi = clean.values.colwise().maxCoeff().transpose();
    const Vector range = hi - lo;
    auto [data, flags] = add_uniform_noise(clean, 200, 0.1, rng);
    CHECK(static_cast<int>(flags.size()) == 200);
    for (int i = 150; i < data.n_rows(); ++i)
      for (int k = 0; k < 6; ++k) {
        CHECK(data.values(i, k) >= lo(k) - 0.1 * range(k));
        CHECK(data.values(i, k) <= hi(k) + 0.1 * range(k));
      }
  }
}

TEST_CASE("add_pointwise") {
  const MfaParams truth = builtin_mixture_truth();
  Rng rng(4);
  auto [clean, labels] = sample_mixture(truth, 150, rng);

  SUBCASE("contamination far outside the range is accepted") {
    auto [data, flags] = add_pointwise(clean, 10, Vector::Constant(6, 25.0), rng);
    CHECK(data.n_rows() == 160);
    CHECK(flags == std::vector<int>(10, kPointwiseLabel));
    for (int i = 150; i < 160; ++i)
      for (int k = 0; k < 6; ++k) CHECK(std::abs(data.values(i, k) - 25.0) <= 0.1);
  }

  SUBCASE("the global mean is rejected") {
    const Vector mean = clean.values.colwise().mean().transpose();
    CHECK_THROWS_AS(add_pointwise(clean, 10, mean, rng), std::invalid_argument);
  }
}

TEST_CASE("generate_scenario composition") {
  ScenarioSpec spec;
  spec.truth = builtin_mixture_truth();
  spec.n_clean = 150;
  spec.n_noise = 10;
  spec.n_pointwise = 10;
  spec.seed = 9;

  const GeneratedData gen = generate_scenario(spec);
  CHECK(gen.data.n_rows() == 170);
  CHECK(gen.labels.size() == 170);

  int clean = 0, noise = 0, pointwise = 0;
  for (int v : gen.labels) {
    if (v == kNoiseLabel)
      ++noise;
    else if (v == kPointwiseLabel)
      ++pointwise;
    else {
      CHECK(v >= 0);
      CHECK(v < 3);
      ++clean;
    }
  }
  CHECK(clean == 150);
  CHECK(noise == 10);
  CHECK(pointwise == 10);

  // the trimming budget alignment that makes alpha = 0.06 work on 160 rows
  CHECK(trim_keep_count(160, 0.06) == 150);

  const GeneratedData again = generate_scenario(spec);
  CHECK((gen.data.values - again.data.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scenario file parsing") {
  const std::string text = R"(
# comment
truth = g3p6d2
n_clean = 200
n_noise = 5
n_pointwise = 3
noise_expansion = 0.2
pointwise_location = 25, 25, 25, 25, 25, 25
seed = 77
)";
  const ScenarioSpec spec = parse_scenario_text(text);
  CHECK(spec.n_clean == 200);
  CHECK(spec.n_noise == 5);
  CHECK(spec.n_pointwise == 3);
  CHECK(spec.noise_box_expansion == doctest::Approx(0.2));
  CHECK(spec.pointwise_location.size() == 6);
  CHECK(spec.seed == 77);

  CHECK_THROWS_AS(parse_scenario_text("bogus_key = 3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario_text("n_clean"), std::invalid_argument);
}
