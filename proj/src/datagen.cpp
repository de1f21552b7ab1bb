#include "tmfa/datagen.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace tmfa {

MfaParams builtin_mixture_truth(const std::string& name) {
  if (name != "g3p6d2")
    throw std::invalid_argument("builtin_mixture_truth: unknown name '" + name + "'");

  const int p = 6;
  MfaParams truth;
  truth.weights = Vector(3);
  truth.weights << 0.3, 0.4, 0.3;

  truth.means = {Vector::Constant(p, 0.0), Vector::Constant(p, 5.0), Vector::Constant(p, 10.0)};
  truth.noise_diag = {Vector::Constant(p, 0.1), Vector::Constant(p, 0.4),
                      Vector::Constant(p, 0.2)};

  Matrix l1(p, 2), l2(p, 2), l3(p, 2);
  l1 << 0.50, 1.00,
        1.00, 0.45,
        0.05, -0.50,
       -0.60, 0.50,
        0.50, 0.10,
        1.00, -0.15;
  l2 << 0.10, 0.20,
        0.20, 0.50,
        1.00, -1.00,
       -0.20, 0.50,
        1.00, 0.70,
        1.20, -0.30;
  l3 << 0.10, 0.20,
        0.20, 0.00,
        1.00, 0.00,
       -0.20, 0.00,
        1.00, 0.00,
        0.00, -1.30;
  truth.loadings = {l1, l2, l3};
  truth.validate();
  return truth;
}

void ScenarioSpec::validate() const {
  truth.validate();
  if (n_clean + n_noise + n_pointwise <= 0)
    throw std::invalid_argument("ScenarioSpec: no rows to generate");
  if (n_clean < 0 || n_noise < 0 || n_pointwise < 0)
    throw std::invalid_argument("ScenarioSpec: negative counts");
  if (!(noise_box_expansion >= 0.0))
    throw std::invalid_argument("ScenarioSpec: noise_box_expansion must be >= 0");
  if (pointwise_location.size() != 0 && pointwise_location.size() != truth.n_vars())
    throw std::invalid_argument("ScenarioSpec: pointwise_location has wrong dimension");
}

std::pair<DataMatrix, std::vector<int>> sample_mixture(const MfaParams& truth, int n, Rng& rng) {
  truth.validate();
  const int p = truth.n_vars();
  const int d = truth.n_factors();
  const int G = truth.n_components();

  Vector cum(G);
  double acc = 0.0;
  for (int g = 0; g < G; ++g) {
    acc += truth.weights(g);
    cum(g) = acc;
  }

  std::vector<Vector> noise_sd(G);
  for (int g = 0; g < G; ++g) noise_sd[g] = truth.noise_diag[g].cwiseSqrt();

  DataMatrix data;
  data.values.resize(n, p);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    int g = 0;
    while (g < G - 1 && u >= cum(g)) ++g;
    labels[i] = g;

    Vector x = truth.means[g];
    if (d > 0) x += truth.loadings[g] * rng.normal_vector(d);
    for (int k = 0; k < p; ++k) x(k) += noise_sd[g](k) * rng.normal();
    data.values.row(i) = x.transpose();
  }
  return {std::move(data), std::move(labels)};
}

namespace {

void column_box(const Matrix& values, Vector& lo, Vector& hi) {
  lo = values.colwise().minCoeff().transpose();
  hi = values.colwise().maxCoeff().transpose();
}

DataMatrix append_rows(const DataMatrix& data, const Matrix& extra) {
  DataMatrix out;
  out.column_names = data.column_names;
  out.values.resize(data.values.rows() + extra.rows(), data.values.cols());
  out.values.topRows(data.values.rows()) = data.values;
  out.values.bottomRows(extra.rows()) = extra;
  return out;
}

}  // namespace

std::pair<DataMatrix, std::vector<int>> add_uniform_noise(const DataMatrix& data, int n_noise,
                                                          double expansion, Rng& rng) {
  if (n_noise < 0) throw std::invalid_argument("add_uniform_noise: negative count");
  if (n_noise == 0) return {data, {}};

  const int p = data.n_cols();
  Vector lo, hi;
  column_box(data.values, lo, hi);
  const Vector range = hi - lo;

  Matrix extra(n_noise, p);
  for (int i = 0; i < n_noise; ++i)
    for (int k = 0; k < p; ++k)
      extra(i, k) = rng.uniform(lo(k) - expansion * range(k), hi(k) + expansion * range(k));

  return {append_rows(data, extra), std::vector<int>(n_noise, kNoiseLabel)};
}

std::pair<DataMatrix, std::vector<int>> add_pointwise(const DataMatrix& data, int n_pw,
                                                      const Vector& location, Rng& rng) {
  if (n_pw < 0) throw std::invalid_argument("add_pointwise: negative count");
  const int p = data.n_cols();
  if (location.size() != p) throw std::invalid_argument("add_pointwise: location dimension mismatch");

  Vector lo, hi;
  column_box(data.values, lo, hi);
  bool outside = false;
  for (int k = 0; k < p && !outside; ++k)
    outside = location(k) < lo(k) || location(k) > hi(k);
  if (!outside)
    throw std::invalid_argument("add_pointwise: location lies inside the data bounding box");

  if (n_pw == 0) return {data, {}};

  Matrix extra(n_pw, p);
  for (int i = 0; i < n_pw; ++i)
    for (int k = 0; k < p; ++k) extra(i, k) = location(k) + rng.uniform(-0.1, 0.1);

  return {append_rows(data, extra), std::vector<int>(n_pw, kPointwiseLabel)};
}

GeneratedData generate_scenario(const ScenarioSpec& spec) {
  spec.validate();
  const int p = spec.truth.n_vars();

  Rng clean_rng = Rng::substream(spec.seed, 0);
  Rng noise_rng = Rng::substream(spec.seed, 1);
  Rng pw_rng = Rng::substream(spec.seed, 2);

  GeneratedData out;
  auto [clean, labels] = sample_mixture(spec.truth, spec.n_clean, clean_rng);
  out.data = std::move(clean);
  out.labels = std::move(labels);

  if (spec.n_noise > 0) {
    auto [with_noise, flags] = add_uniform_noise(out.data, spec.n_noise,
                                                 spec.noise_box_expansion, noise_rng);
    out.data = std::move(with_noise);
    out.labels.insert(out.labels.end(), flags.begin(), flags.end());
  }
  if (spec.n_pointwise > 0) {
    Vector location = spec.pointwise_location;
    if (location.size() == 0) location = Vector::Constant(p, 25.0);
    auto [with_pw, flags] = add_pointwise(out.data, spec.n_pointwise, location, pw_rng);
    out.data = std::move(with_pw);
    out.labels.insert(out.labels.end(), flags.begin(), flags.end());
  }
  return out;
}

namespace {

std::string trim_ws(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

ScenarioSpec parse_scenario_text(const std::string& text) {
  ScenarioSpec spec;
  spec.truth = builtin_mixture_truth();

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim_ws(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("scenario line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim_ws(line.substr(0, eq));
    const std::string value = trim_ws(line.substr(eq + 1));

    try {
      if (key == "truth")
        spec.truth = builtin_mixture_truth(value);
      else if (key == "n_clean")
        spec.n_clean = std::stoi(value);
      else if (key == "n_noise")
        spec.n_noise = std::stoi(value);
      else if (key == "n_pointwise")
        spec.n_pointwise = std::stoi(value);
      else if (key == "noise_expansion")
        spec.noise_box_expansion = std::stod(value);
      else if (key == "seed")
        spec.seed = std::stoull(value);
      else if (key == "pointwise_location") {
        std::string cleaned = value;
        for (char& ch : cleaned)
          if (ch == ',') ch = ' ';
        std::istringstream vin(cleaned);
        std::vector<double> coords;
        double x;
        while (vin >> x) coords.push_back(x);
        spec.pointwise_location = Eigen::Map<Vector>(coords.data(), coords.size());
      } else {
        throw std::invalid_argument("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("scenario line " + std::to_string(lineno) +
                                  ": cannot parse value for '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

ScenarioSpec parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open scenario file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_text(buffer.str());
}

}  // namespace tmfa
