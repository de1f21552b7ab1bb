#include "tmfa/presets.hpp"

namespace tmfa {

std::vector<Setting> standard_settings() {
  return {
      {"S1", 1e10, 1e10, 0.0},
      {"S2", 5.0, 1e10, 0.0},
      {"S3", 5.0, 3.0, 0.0},
      {"S4", 1e10, 1e10, 0.06},
      {"S5", 5.0, 1e10, 0.06},
      {"S6", 5.0, 3.0, 0.06},
  };
}

double effective_alpha(const Setting& setting, const ScenarioSpec& scenario) {
  if (setting.alpha > 0.0 && scenario.n_noise > 0 && scenario.n_pointwise > 0) return 0.12;
  return setting.alpha;
}

ScenarioSpec named_scenario(const std::string& name, int n_clean) {
  ScenarioSpec spec;
  spec.truth = builtin_mixture_truth();
  spec.n_clean = n_clean;
  if (name == "D") {
    // clean data only
  } else if (name == "D+N") {
    spec.n_noise = 10;
  } else if (name == "D+PC") {
    spec.n_pointwise = 10;
  } else if (name == "D+N+PC") {
    spec.n_noise = 10;
    spec.n_pointwise = 10;
  } else {
    throw std::invalid_argument("named_scenario: unknown scenario '" + name + "'");
  }
  return spec;
}

FitConfig benchmark_fit_config(const ScenarioSpec& scenario, const Setting& setting,
                               int n_starts) {
  FitConfig config;
  config.n_components = scenario.truth.n_components();
  config.n_factors = scenario.truth.n_factors();
  config.alpha = effective_alpha(setting, scenario);
  config.bounds.c_noise = setting.c_noise;
  config.bounds.c_load = setting.c_load;
  config.n_starts = n_starts;
  // the target-change criterion needs a few hundred to a few thousand cycles
  // on these surfaces; a tight cap would discard good starts as non-converged
  // while degenerate ones that stop early stay eligible
  config.max_iter = 4000;
  return config;
}

}  // namespace tmfa
