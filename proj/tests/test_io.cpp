#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "tmfa/aecm.hpp"
#include "tmfa/csv.hpp"
#include "tmfa/datagen.hpp"
#include "tmfa/serialize.hpp"

using namespace tmfa;

TEST_CASE("csv parsing") {
  SUBCASE("header autodetection") {
    const CsvData with = parse_csv_text("a,b\n1,2\n3,4\n");
    CHECK(with.had_header);
    CHECK(with.data.column_names == std::vector<std::string>{"a", "b"});
    CHECK(with.data.values(1, 1) == 4.0);

    const CsvData without = parse_csv_text("1,2\n3,4\n");
    CHECK_FALSE(without.had_header);
    CHECK(without.data.n_rows() == 2);
  }

  SUBCASE("label column extraction") {
    CsvOptions options;
    options.label_column = "sex";
    const CsvData csv = parse_csv_text("x,sex,y\n1,f,2\n3,m,4\n5,f,6\n", options);
    CHECK(csv.data.n_cols() == 2);
    CHECK(csv.labels == std::vector<std::string>{"f", "m", "f"});
    CHECK(csv.data.values(2, 1) == 6.0);

    std::vector<std::string> classes;
    const std::vector<int> encoded = encode_labels(csv.labels, classes);
    CHECK(classes == std::vector<std::string>{"f", "m"});
    CHECK(encoded == std::vector<int>{0, 1, 0});
  }

  SUBCASE("diagnostics carry row and column") {
    try {
      parse_csv_text("a,b\n1,2\n1,oops\n", {}, "test.csv");
      FAIL("expected a parse error");
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      CHECK(msg.find("row 3") != std::string::npos);
      CHECK(msg.find("column 2") != std::string::npos);
      CHECK(msg.find("oops") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_csv_text("a,b\n1,2\n3\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_csv_text(""), std::invalid_argument);
  }

  SUBCASE("round trip through a file") {
    Rng rng(1);
    const Matrix values = rng.normal_matrix(20, 3);
    const std::string path = "tmfa_test_roundtrip.csv";
    write_csv(path, values, {"alpha", "beta", "gamma"});
    const CsvData back = read_csv(path);
    CHECK(back.had_header);
    CHECK((back.data.values - values).cwiseAbs().maxCoeff() == 0.0);
    std::remove(path.c_str());
  }
}

TEST_CASE("params JSON round trip preserves the trimmed target") {
  const MfaParams truth = builtin_mixture_truth();
  ScenarioSpec spec;
  spec.truth = truth;
  spec.n_noise = 10;
  spec.seed = 99;
  const GeneratedData gen = generate_scenario(spec);

  FitConfig config;
  config.n_components = 3;
  config.n_factors = 2;
  config.alpha = 0.06;
  config.bounds = {5.0, 3.0};
  config.n_starts = 3;
  config.seed = 12;
  const FitResult result = fit(gen.data, config);

  const Json j = to_json(result.params);
  const MfaParams restored = params_from_json(Json::parse(j.dump()));
  const double target = trimmed_log_likelihood(gen.data, restored, config.alpha);
  CHECK(std::abs(target - result.target) < 1e-10);
}

TEST_CASE("format_double round trips") {
  Rng rng(7);
  for (int t = 0; t < 200; ++t) {
    const double v = rng.normal() * std::exp(rng.uniform(-20, 20));
    CHECK(std::stod(format_double(v)) == v);
  }
}
