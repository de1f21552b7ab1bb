#include "tmfa/serialize.hpp"

#include <fstream>

namespace tmfa {

namespace {

Json vector_to_json(const Vector& v) {
  Json arr = Json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (int r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector vector_from_json(const Json& j) {
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

Matrix matrix_from_json(const Json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  return m;
}

}  // namespace

Json to_json(const MfaParams& params) {
  Json j;
  j["weights"] = vector_to_json(params.weights);
  j["means"] = Json::array();
  j["loadings"] = Json::array();
  j["noise_diag"] = Json::array();
  for (int g = 0; g < params.n_components(); ++g) {
    j["means"].push_back(vector_to_json(params.means[g]));
    j["loadings"].push_back(matrix_to_json(params.loadings[g]));
    j["noise_diag"].push_back(vector_to_json(params.noise_diag[g]));
  }
  return j;
}

MfaParams params_from_json(const Json& j) {
  MfaParams params;
  params.weights = vector_from_json(j.at("weights"));
  for (const auto& m : j.at("means")) params.means.push_back(vector_from_json(m));
  for (const auto& l : j.at("loadings")) params.loadings.push_back(matrix_from_json(l));
  for (const auto& n : j.at("noise_diag")) params.noise_diag.push_back(vector_from_json(n));
  params.validate();
  return params;
}

Json to_json(const FitConfig& config) {
  return Json{{"n_components", config.n_components},
              {"n_factors", config.n_factors},
              {"alpha", config.alpha},
              {"c_noise", config.bounds.c_noise},
              {"c_load", config.bounds.c_load},
              {"n_starts", config.n_starts},
              {"max_iter", config.max_iter},
              {"tol_target", config.tol_target},
              {"seed", config.seed}};
}

Json to_json(const FitResult& result) {
  Json j;
  j["params"] = to_json(result.params);
  j["target"] = result.target;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["start_index"] = result.start_index;
  j["best_was_nonconverged"] = result.best_was_nonconverged;
  j["trim_indicator"] = result.trim_indicator;
  j["labels"] = result.labels;
  j["target_trace"] = result.target_trace;
  j["posteriors"] = matrix_to_json(result.posteriors);
  return j;
}

Json to_json(const ExperimentReport& report, bool include_reps) {
  Json j;
  j["eta_mean"] = report.eta_mean;
  j["repetitions"] = report.repetitions;
  j["excluded"] = report.excluded;
  j["bias"] = report.bias;
  j["mse"] = report.mse;
  if (include_reps) {
    Json reps = Json::array();
    for (const auto& rec : report.reps) {
      Json r{{"eta", rec.eta},
             {"target", rec.target},
             {"converged", rec.converged},
             {"excluded", rec.excluded}};
      if (!rec.note.empty()) r["note"] = rec.note;
      reps.push_back(std::move(r));
    }
    j["reps"] = std::move(reps);
  }
  return j;
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open JSON file: " + path);
  Json j;
  in >> j;
  return j;
}

}  // namespace tmfa
