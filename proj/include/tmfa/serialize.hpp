#ifndef TMFA_SERIALIZE_HPP
#define TMFA_SERIALIZE_HPP

#include <string>

#include <json.hpp>

#include "tmfa/aecm.hpp"
#include "tmfa/eval.hpp"
#include "tmfa/types.hpp"

namespace tmfa {

using Json = nlohmann::json;

Json to_json(const MfaParams& params);
MfaParams params_from_json(const Json& j);

Json to_json(const FitConfig& config);
Json to_json(const FitResult& result);
Json to_json(const ExperimentReport& report, bool include_reps = true);

void write_json_file(const std::string& path, const Json& j);
Json read_json_file(const std::string& path);

}  // namespace tmfa

#endif
