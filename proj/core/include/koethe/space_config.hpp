#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "koethe/weight_family.hpp"

namespace koethe {

struct AnalysisParams {
  std::uint64_t depth = 10000;
  std::uint64_t level_budget = 8;
  long double epsilon = 1e-6L;
};

// One space definition as read from a JSON file: either a builtin name with
// parameters or a DSL expression (level-parameterized via k, or an explicit
// list of per-level expressions).  `expected`, when present, carries the
// reference profile used by the regression suite.
struct SpaceConfig {
  std::string name;
  WeightFamily family;
  AnalysisParams analysis;
  nlohmann::json expected;  // empty object when absent

  nlohmann::json to_json() const;
};

// Parses and validates; throws ConfigError on malformed input and runs
// axioms_check before returning.
SpaceConfig space_config_from_json(const nlohmann::json& j);
SpaceConfig load_space_config(const std::string& path);

nlohmann::json family_to_json(const WeightFamily& P);

// The shipped example catalog with expected profiles embedded.
std::vector<SpaceConfig> golden_catalog();

}  // namespace koethe
