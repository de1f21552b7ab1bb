#ifndef TMFA_DATAGEN_HPP
#define TMFA_DATAGEN_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tmfa/rng.hpp"
#include "tmfa/types.hpp"

namespace tmfa {

// generating-truth labels for contaminated rows
inline constexpr int kNoiseLabel = -2;
inline constexpr int kPointwiseLabel = -3;

// Named built-in mixture truths usable in scenario files. "g3p6d2" is the
// benchmark mixture: three well-separated components in six dimensions with
// two factors each. Throws std::invalid_argument for unknown names.
MfaParams builtin_mixture_truth(const std::string& name = "g3p6d2");

// Generative description of one synthetic dataset: a clean mixture sample,
// optional uniform background noise drawn on the expanded bounding box of
// the clean sample, and optional pointwise contamination replicated at a
// fixed location outside the data range.
struct ScenarioSpec {
  MfaParams truth;
  int n_clean = 150;
  int n_noise = 0;
  int n_pointwise = 0;
  double noise_box_expansion = 0.1;
  Vector pointwise_location;  // default filled with 25 when empty
  std::uint64_t seed = 0;

  void validate() const;
};

// n draws from the mixture: component by the categorical weight law, then
// x = mu_g + Lambda_g u + e. Returns data and generating component labels.
std::pair<DataMatrix, std::vector<int>> sample_mixture(const MfaParams& truth, int n, Rng& rng);

// Appends rows uniform per coordinate on [min_j - expansion*range_j,
// max_j + expansion*range_j], with the column statistics taken from the
// input data. Second return: flags for the appended rows.
std::pair<DataMatrix, std::vector<int>> add_uniform_noise(const DataMatrix& data, int n_noise,
                                                          double expansion, Rng& rng);

// Appends n_pw copies of `location` jittered coordinatewise uniform on
// [-0.1, 0.1]. The location must fall outside the bounding box of the input
// data (at least one coordinate out of range); otherwise invalid_argument.
std::pair<DataMatrix, std::vector<int>> add_pointwise(const DataMatrix& data, int n_pw,
                                                      const Vector& location, Rng& rng);

struct GeneratedData {
  DataMatrix data;
  std::vector<int> labels;  // 0..G-1, kNoiseLabel, kPointwiseLabel
};

// Clean sample, then noise, then pointwise contamination, each on its own
// substream of spec.seed so the pieces are individually reproducible.
GeneratedData generate_scenario(const ScenarioSpec& spec);

// Plain key = value scenario files; see the repository README for the schema.
ScenarioSpec parse_scenario_file(const std::string& path);
ScenarioSpec parse_scenario_text(const std::string& text);

}  // namespace tmfa

#endif
