#ifndef TMFA_PRESETS_HPP
#define TMFA_PRESETS_HPP

#include <string>
#include <vector>

#include "tmfa/aecm.hpp"
#include "tmfa/datagen.hpp"

namespace tmfa {

// One estimation setting of the benchmark grid: constraint bounds plus a
// trimming level. S1-S3 are untrimmed with progressively tighter bounds,
// S4-S6 repeat them with trimming.
struct Setting {
  std::string name;
  double c_noise = 1e10;
  double c_load = 1e10;
  double alpha = 0.0;
};

// S1..S6. Settings with trimming use alpha = 0.06; on scenarios carrying
// both noise and pointwise contamination the trimming level is raised to
// 0.12 so the trim budget covers the 20 contaminated points.
std::vector<Setting> standard_settings();

// alpha adjusted for the scenario as described above
double effective_alpha(const Setting& setting, const ScenarioSpec& scenario);

// Named contamination scenarios on the built-in truth: "D", "D+N", "D+PC",
// "D+N+PC" (seed and n_clean filled by the caller).
ScenarioSpec named_scenario(const std::string& name, int n_clean = 150);

FitConfig benchmark_fit_config(const ScenarioSpec& scenario, const Setting& setting,
                               int n_starts = 10);

}  // namespace tmfa

#endif
