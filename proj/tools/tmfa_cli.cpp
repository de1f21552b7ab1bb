// tmfa: robust model-based clustering with trimmed mixtures of Gaussian
// factor analyzers.
//
//   tmfa fit        fit a model to a numeric CSV
//   tmfa simulate   generate a synthetic dataset from a scenario file
//   tmfa experiment run a Monte-Carlo benchmark preset
//
// Exit codes: 0 success; 2 bad usage; 3 unreadable/unparseable input;
// 4 invalid data or configuration; 5 estimation failed on every start;
// 6 finished but the best start did not converge.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tmfa/aecm.hpp"
#include "tmfa/csv.hpp"
#include "tmfa/datagen.hpp"
#include "tmfa/eval.hpp"
#include "tmfa/lowrank_gauss.hpp"
#include "tmfa/model.hpp"
#include "tmfa/presets.hpp"
#include "tmfa/serialize.hpp"

namespace fs = std::filesystem;
using namespace tmfa;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitValidation = 4;
constexpr int kExitFitFailed = 5;
constexpr int kExitNotConverged = 6;

struct Standardization {
  Vector means;
  Vector sds;
};

Standardization standardize_columns(DataMatrix& data) {
  const int n = data.n_rows();
  const int p = data.n_cols();
  Standardization stats;
  stats.means = data.values.colwise().mean().transpose();
  stats.sds.resize(p);
  for (int k = 0; k < p; ++k) {
    const double ss = (data.values.col(k).array() - stats.means(k)).square().sum();
    stats.sds(k) = std::sqrt(ss / (n - 1));
    if (!(stats.sds(k) > 0.0))
      throw std::invalid_argument("standardize: column " + std::to_string(k + 1) +
                                  " is constant");
    data.values.col(k) = (data.values.col(k).array() - stats.means(k)) / stats.sds(k);
  }
  return stats;
}

Json vector_json(const Vector& v) {
  Json arr = Json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(digits);
  out << v;
  return out.str();
}

std::string setting_header(const std::vector<Setting>& settings) {
  std::ostringstream out;
  out << std::setw(10) << "";
  for (const auto& s : settings) out << std::setw(12) << s.name;
  out << '\n' << std::setw(10) << "c_noise";
  for (const auto& s : settings) out << std::setw(12) << (s.c_noise >= 1e9 ? "1e10" : fixed(s.c_noise, 0));
  out << '\n' << std::setw(10) << "c_load";
  for (const auto& s : settings) out << std::setw(12) << (s.c_load >= 1e9 ? "1e10" : fixed(s.c_load, 0));
  out << '\n' << std::setw(10) << "alpha";
  for (const auto& s : settings) out << std::setw(12) << fixed(s.alpha, 2);
  out << '\n';
  return out.str();
}

// ------------------------------------------------------------------ fit ---

int run_fit(const std::string& input, const std::string& out_dir, FitConfig config,
            bool standardize, const CsvOptions& csv_options, bool serial) {
  fs::create_directories(out_dir);

  CsvData csv;
  try {
    csv = read_csv(input, csv_options);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }

  DataMatrix data = csv.data;
  Json std_json = nullptr;
  if (standardize) {
    const Standardization stats = standardize_columns(data);
    std_json = Json{{"means", vector_json(stats.means)}, {"sds", vector_json(stats.sds)},
                    {"sd_denominator", "n-1"}};
  }

  FitResult result;
  try {
    config.validate(data);
    result = fit(data, config, serial ? Exec::serial : Exec::parallel);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFitFailed;
  }

  const std::vector<int> posthoc = classify_trimmed(data, result);

  // per-point mixture log-density at the fitted parameters
  const Matrix scores = score_matrix(data, result.params, Exec::serial);
  Vector log_mix(data.n_rows());
  for (int i = 0; i < data.n_rows(); ++i) log_mix(i) = log_sum_exp(scores.row(i));

  Json j = to_json(result);
  j["command"] = "fit";
  j["input"] = input;
  j["config"] = to_json(config);
  j["data"] = Json{{"n", data.n_rows()}, {"p", data.n_cols()}, {"columns", data.column_names}};
  j["standardization"] = std_json;
  j["n_parameters"] = parameter_count(data.n_cols(), config.n_factors, config.n_components);
  j["labels_posthoc"] = posthoc;
  j["log_density"] = vector_json(log_mix);

  std::ostringstream summary;
  summary << "rows: " << data.n_rows() << "  columns: " << data.n_cols() << '\n'
          << "components: " << config.n_components << "  factors: " << config.n_factors
          << "  alpha: " << config.alpha << '\n'
          << "c_noise: " << config.bounds.c_noise << "  c_load: " << config.bounds.c_load << '\n'
          << "trimmed log-likelihood: " << format_double(result.target) << '\n'
          << "free parameters: " << j["n_parameters"].get<long>() << '\n'
          << "iterations: " << result.iterations << "  converged: " << std::boolalpha
          << result.converged << "  best start: " << result.start_index << '\n';

  std::vector<std::string> label_strings(data.n_rows());
  for (int i = 0; i < data.n_rows(); ++i)
    label_strings[i] =
        result.labels[i] == kTrimmedLabel ? "TRIMMED" : std::to_string(result.labels[i]);

  if (!csv.labels.empty()) {
    // labels named NOISE / POINTWISE (as written by `simulate`) mark
    // contamination: such points count as correct only when trimmed
    std::vector<std::string> plain;
    for (const auto& s : csv.labels)
      if (s != "NOISE" && s != "POINTWISE") plain.push_back(s);
    std::vector<std::string> classes;
    encode_labels(plain, classes);
    std::vector<int> truth(csv.labels.size());
    for (std::size_t i = 0; i < csv.labels.size(); ++i) {
      if (csv.labels[i] == "NOISE")
        truth[i] = kNoiseLabel;
      else if (csv.labels[i] == "POINTWISE")
        truth[i] = kPointwiseLabel;
      else
        truth[i] = static_cast<int>(
            std::lower_bound(classes.begin(), classes.end(), csv.labels[i]) - classes.begin());
    }
    const double eta_assigned = misclassification_error(result.labels, truth);
    const double eta_posthoc = misclassification_error(posthoc, truth);
    j["label_classes"] = classes;
    j["eta_trimmed_as_errors"] = eta_assigned;
    j["eta_posthoc"] = eta_posthoc;

    summary << '\n'
            << "label column: " << csv.label_column << " (classes:";
    for (const auto& c : classes) summary << ' ' << c;
    summary << ")\n"
            << "misclassification, trimmed counted as errors: " << fixed(eta_assigned) << '\n'
            << "misclassification after Bayes assignment of trimmed units: "
            << fixed(eta_posthoc) << '\n';
  }

  // trimmed units with their per-component weighted densities
  Json trimmed = Json::array();
  summary << "\ntrimmed units (1-based row numbers):\n";
  for (int i = 0; i < data.n_rows(); ++i) {
    if (result.trim_indicator[i] != 0) continue;
    Json unit{{"row", i}, {"assigned", posthoc[i]}};
    Json dg = Json::array();
    summary << "  row " << std::setw(5) << (i + 1) << ":";
    for (int g = 0; g < config.n_components; ++g) {
      const double density = std::exp(scores(i, g));
      dg.push_back(density);
      std::ostringstream cell;
      cell.setf(std::ios::scientific);
      cell.precision(2);
      cell << density;
      summary << "  D_" << (g + 1) << " = " << cell.str();
    }
    unit["component_densities"] = dg;
    if (!csv.labels.empty()) unit["label"] = csv.labels[i];
    trimmed.push_back(std::move(unit));
    summary << "  ->  component " << (posthoc[i] + 1);
    if (!csv.labels.empty()) summary << "  (label " << csv.labels[i] << ")";
    summary << '\n';
  }
  if (trimmed.empty()) summary << "  none\n";
  j["trimmed_units"] = std::move(trimmed);

  write_json_file((fs::path(out_dir) / "result.json").string(), j);
  write_csv((fs::path(out_dir) / "labels.csv").string(), log_mix,
            {"log_density"}, label_strings, "label");
  {
    std::ofstream out(fs::path(out_dir) / "summary.txt");
    out << summary.str();
  }
  std::cout << summary.str();

  if (!result.converged) {
    std::cerr << "warning: best start did not converge within max_iter\n";
    return kExitNotConverged;
  }
  return 0;
}

// ------------------------------------------------------------- simulate ---

int run_simulate(const std::string& scenario_path, const std::string& out_dir) {
  fs::create_directories(out_dir);
  ScenarioSpec spec;
  try {
    spec = parse_scenario_file(scenario_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }

  const GeneratedData gen = generate_scenario(spec);
  std::vector<std::string> labels(gen.labels.size());
  for (std::size_t i = 0; i < gen.labels.size(); ++i) {
    if (gen.labels[i] == kNoiseLabel)
      labels[i] = "NOISE";
    else if (gen.labels[i] == kPointwiseLabel)
      labels[i] = "POINTWISE";
    else
      labels[i] = std::to_string(gen.labels[i]);
  }

  std::vector<std::string> names(gen.data.n_cols());
  for (int k = 0; k < gen.data.n_cols(); ++k) names[k] = "x" + std::to_string(k + 1);
  write_csv((fs::path(out_dir) / "data.csv").string(), gen.data.values, names, labels, "truth");

  std::cout << "wrote " << gen.data.n_rows() << " rows (" << spec.n_clean << " clean, "
            << spec.n_noise << " noise, " << spec.n_pointwise << " pointwise) to "
            << (fs::path(out_dir) / "data.csv").string() << '\n';
  return 0;
}

// ----------------------------------------------------------- experiment ---

std::string rep_csv_header(const MfaParams& truth) {
  std::ostringstream head;
  head << "scenario,setting,rep,eta,converged,excluded,target";
  const int G = truth.n_components(), p = truth.n_vars(), d = truth.n_factors();
  for (int g = 1; g <= G; ++g) head << ",pi_" << g;
  for (int g = 1; g <= G; ++g)
    for (int k = 1; k <= p; ++k) head << ",mu_" << g << '_' << k;
  for (int g = 1; g <= G; ++g)
    for (int k = 1; k <= p; ++k) head << ",psi_" << g << '_' << k;
  for (int g = 1; g <= G; ++g)
    for (int r = 1; r <= p; ++r)
      for (int c = 1; c <= d; ++c) head << ",lambda_" << g << '_' << r << '_' << c;
  head << '\n';
  return head.str();
}

// aligned per-repetition estimates, one row each; excluded repetitions keep
// the metadata columns and leave the parameter cells empty
void append_rep_rows(std::ostringstream& csv, const std::string& scenario,
                     const std::string& setting, const ExperimentReport& report,
                     int param_cells) {
  for (std::size_t r = 0; r < report.reps.size(); ++r) {
    const auto& rec = report.reps[r];
    csv << scenario << ',' << setting << ',' << r << ',' << format_double(rec.eta) << ','
        << (rec.converged ? 1 : 0) << ',' << (rec.excluded ? 1 : 0) << ','
        << format_double(rec.target);
    if (!rec.excluded) {
      const MfaParams& e = rec.aligned;
      for (int g = 0; g < e.n_components(); ++g) csv << ',' << format_double(e.weights(g));
      for (int g = 0; g < e.n_components(); ++g)
        for (int k = 0; k < e.n_vars(); ++k) csv << ',' << format_double(e.means[g](k));
      for (int g = 0; g < e.n_components(); ++g)
        for (int k = 0; k < e.n_vars(); ++k) csv << ',' << format_double(e.noise_diag[g](k));
      for (int g = 0; g < e.n_components(); ++g)
        for (int r2 = 0; r2 < e.n_vars(); ++r2)
          for (int c2 = 0; c2 < e.n_factors(); ++c2)
            csv << ',' << format_double(e.loadings[g](r2, c2));
    } else {
      for (int k = 0; k < param_cells; ++k) csv << ',';
    }
    csv << '\n';
  }
}

int run_experiment_cmd(const std::string& preset, int reps, int n_clean, int n_starts,
                       std::uint64_t seed, const std::string& out_dir, bool serial) {
  fs::create_directories(out_dir);
  const Exec exec = serial ? Exec::serial : Exec::parallel;

  std::vector<std::string> scenarios;
  std::vector<Setting> settings;
  if (preset == "table1") {
    scenarios = {"D"};
    settings = standard_settings();
  } else if (preset == "table2") {
    scenarios = {"D+N", "D+PC", "D+N+PC"};
    settings = standard_settings();
  } else if (preset == "bias-mse") {
    scenarios = {"D", "D+N", "D+PC", "D+N+PC"};
    settings = {{"unconstrained", 1e10, 1e10, 0.0}, {"robust", 5.0, 3.0, 0.06}};
  } else {
    std::cerr << "error: unknown preset '" << preset << "'\n";
    return kExitUsage;
  }

  Json report_json;
  report_json["preset"] = preset;
  report_json["repetitions"] = reps;
  report_json["seed"] = seed;
  report_json["n_clean"] = n_clean;
  report_json["rows"] = Json::array();

  std::ostringstream table;
  table << "preset " << preset << ", " << reps << " repetitions, n_clean = " << n_clean
        << ", seed = " << seed << "\n\n";
  table << setting_header(settings) << std::string(10 + 12 * settings.size(), '-') << '\n';

  const MfaParams truth = builtin_mixture_truth();
  const int param_cells =
      truth.n_components() * (1 + 2 * truth.n_vars() + truth.n_vars() * truth.n_factors());
  std::ostringstream reps_csv;
  reps_csv << rep_csv_header(truth);

  bool all_converged = true;
  int scenario_index = 0;
  for (const auto& scenario_name : scenarios) {
    const ScenarioSpec scenario = named_scenario(scenario_name, n_clean);
    table << std::setw(10) << scenario_name;
    int setting_index = 0;
    for (const auto& setting : settings) {
      const FitConfig config = benchmark_fit_config(scenario, setting, n_starts);
      const std::uint64_t run_seed =
          mix64(mix64(seed) + 1000 * scenario_index + setting_index);
      const ExperimentReport report = run_experiment(scenario, config, reps, run_seed, exec);

      table << std::setw(12) << fixed(report.eta_mean);
      Json row{{"scenario", scenario_name},
               {"setting", setting.name},
               {"c_noise", setting.c_noise},
               {"c_load", setting.c_load},
               {"alpha", effective_alpha(setting, scenario)},
               {"eta_mean", report.eta_mean},
               {"excluded", report.excluded},
               {"bias", report.bias},
               {"mse", report.mse}};
      report_json["rows"].push_back(std::move(row));
      append_rep_rows(reps_csv, scenario_name, setting.name, report, param_cells);
      for (const auto& rec : report.reps) all_converged = all_converged && rec.converged;
      ++setting_index;
    }
    table << '\n';
    ++scenario_index;
  }

  if (preset == "bias-mse") {
    table << "\nper-parameter bias (mse), robust columns use alpha 0.06 or 0.12:\n";
    for (const auto& row : report_json["rows"]) {
      table << "\n" << row["scenario"].get<std::string>() << " / "
            << row["setting"].get<std::string>() << ":\n";
      const auto& bias = row["bias"];
      const auto& mse = row["mse"];
      for (auto it = bias.begin(); it != bias.end(); ++it) {
        table << "  " << std::setw(12) << it.key() << "  " << std::setw(12)
              << fixed(it.value().get<double>(), 4) << "  ("
              << fixed(mse[it.key()].get<double>(), 4) << ")\n";
      }
    }
  }

  write_json_file((fs::path(out_dir) / "report.json").string(), report_json);
  {
    std::ofstream out(fs::path(out_dir) / "table.txt");
    out << table.str();
  }
  {
    std::ofstream out(fs::path(out_dir) / "reps.csv");
    out << reps_csv.str();
  }
  std::cout << table.str();
  return all_converged ? 0 : kExitNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trimmed mixtures of Gaussian factor analyzers"};
  app.require_subcommand(1);

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit a model to a CSV dataset");
  std::string input, out_dir = "tmfa_out", label_col, header_mode = "auto";
  std::string delimiter = ",";
  FitConfig config;
  config.n_components = 2;
  config.n_factors = 1;
  bool standardize = false, serial = false;
  fit_cmd->add_option("--input", input, "input CSV path")->required();
  fit_cmd->add_option("--g", config.n_components, "number of mixture components");
  fit_cmd->add_option("--d", config.n_factors, "number of latent factors");
  fit_cmd->add_option("--alpha", config.alpha, "trimming level in [0,1)");
  fit_cmd->add_option("--c-noise", config.bounds.c_noise, "noise ratio bound (>= 1)");
  fit_cmd->add_option("--c-load", config.bounds.c_load, "loading eigenvalue ratio bound (>= 1)");
  fit_cmd->add_option("--starts", config.n_starts, "number of random starts");
  fit_cmd->add_option("--max-iter", config.max_iter, "iteration cap per start");
  fit_cmd->add_option("--tol", config.tol_target, "relative target tolerance");
  fit_cmd->add_option("--seed", config.seed, "random seed");
  fit_cmd->add_flag("--standardize", standardize, "zero-mean unit-variance columns before fitting");
  fit_cmd->add_option("--label-col", label_col,
                      "label column, excluded from fitting and used for error reporting");
  fit_cmd->add_option("--out", out_dir, "output directory");
  fit_cmd->add_option("--delimiter", delimiter, "CSV delimiter (default ,)");
  fit_cmd->add_option("--header", header_mode, "header handling: auto|yes|no");
  fit_cmd->add_flag("--serial", serial, "disable multithreading");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "generate data from a scenario file");
  std::string scenario_path, sim_out = "tmfa_out";
  sim_cmd->add_option("--scenario", scenario_path, "scenario file")->required();
  sim_cmd->add_option("--out", sim_out, "output directory");

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "run a Monte-Carlo benchmark preset");
  std::string preset = "table1", exp_out = "tmfa_out";
  int reps = 20, n_clean = 150, exp_starts = 10;
  std::uint64_t exp_seed = 0;
  bool exp_serial = false;
  exp_cmd->add_option("--preset", preset, "table1 | table2 | bias-mse")->required();
  exp_cmd->add_option("--reps", reps, "Monte-Carlo repetitions");
  exp_cmd->add_option("--n-clean", n_clean, "clean sample size per repetition");
  exp_cmd->add_option("--starts", exp_starts, "random starts per fit");
  exp_cmd->add_option("--seed", exp_seed, "random seed");
  exp_cmd->add_option("--out", exp_out, "output directory");
  exp_cmd->add_flag("--serial", exp_serial, "disable multithreading");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (fit_cmd->parsed()) {
      CsvOptions csv_options;
      if (!delimiter.empty()) csv_options.delimiter = delimiter[0];
      csv_options.label_column = label_col;
      if (header_mode == "yes")
        csv_options.header = CsvOptions::Header::yes;
      else if (header_mode == "no")
        csv_options.header = CsvOptions::Header::no;
      return run_fit(input, out_dir, config, standardize, csv_options, serial);
    }
    if (sim_cmd->parsed()) return run_simulate(scenario_path, sim_out);
    if (exp_cmd->parsed())
      return run_experiment_cmd(preset, reps, n_clean, exp_starts, exp_seed, exp_out,
                                exp_serial);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}
