#include "koethe/space_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "koethe/errors.hpp"

namespace koethe {

namespace {

const nlohmann::json& require_field(const nlohmann::json& j, const char* key,
                                    const char* where) {
  if (!j.contains(key))
    throw ConfigError(std::string(where) + " is missing the required field '" + key + "'");
  return j.at(key);
}

std::string require_string(const nlohmann::json& j, const char* key, const char* where) {
  const nlohmann::json& v = require_field(j, key, where);
  if (!v.is_string())
    throw ConfigError(std::string(where) + "." + key + " must be a string");
  return v.get<std::string>();
}

FamilyFlags flags_from_json(const nlohmann::json& j) {
  FamilyFlags f;
  if (j.is_null()) return f;
  if (!j.is_object()) throw ConfigError("family.flags must be an object");
  if (j.contains("pointwise_ordered"))
    f.pointwise_ordered = j.at("pointwise_ordered").get<bool>();
  if (j.contains("monotone_in_index")) {
    auto m = monotonicity_from_name(j.at("monotone_in_index").get<std::string>());
    if (!m) throw ConfigError("unknown monotonicity name in family.flags");
    f.monotone_in_index = *m;
  }
  if (j.contains("all_weights_ge_one"))
    f.all_weights_ge_one = j.at("all_weights_ge_one").get<bool>();
  return f;
}

WeightFamily family_from_json(const nlohmann::json& j, const std::string& name) {
  if (!j.is_object()) throw ConfigError("family must be an object");

  if (j.contains("builtin")) {
    std::string id = require_string(j, "builtin", "family");
    nlohmann::json params = j.value("params", nlohmann::json::object());
    if (!params.is_object()) throw ConfigError("family.params must be an object");
    return make_builtin(id, params);
  }

  const nlohmann::json& idx_j = require_field(j, "index_set", "family");
  std::string kind = require_string(idx_j, "kind", "family.index_set");
  std::optional<std::uint64_t> size;
  if (idx_j.contains("size")) size = idx_j.at("size").get<std::uint64_t>();
  IndexSet idx = IndexSet::from_kind_name(kind, size);
  FamilyFlags flags = flags_from_json(j.value("flags", nlohmann::json()));

  if (j.contains("expr")) {
    std::string text = require_string(j, "expr", "family");
    return WeightFamily::from_expr(idx, dsl::parse(text), flags, name);
  }
  if (j.contains("levels")) {
    const nlohmann::json& arr = j.at("levels");
    if (!arr.is_array() || arr.empty())
      throw ConfigError("family.levels must be a nonempty array of expressions");
    std::vector<dsl::ExprPtr> levels;
    for (const nlohmann::json& t : arr) {
      if (!t.is_string()) throw ConfigError("family.levels entries must be strings");
      levels.push_back(dsl::parse(t.get<std::string>()));
    }
    return WeightFamily::from_levels(idx, std::move(levels), flags, name);
  }
  throw ConfigError("family needs one of 'builtin', 'expr' or 'levels'");
}

}  // namespace

nlohmann::json family_to_json(const WeightFamily& P) {
  nlohmann::json j;
  j["name"] = P.name();
  nlohmann::json idx{{"kind", P.index_set().kind_name()}};
  if (P.index_set().count()) idx["size"] = *P.index_set().count();
  j["index_set"] = idx;

  if (P.builtin()) {
    // Emit the same builtin-plus-params shape family_from_json consumes.
    const BuiltinInfo& b = *P.builtin();
    j["builtin"] = b.id;
    nlohmann::json params = nlohmann::json::object();
    if (b.R)
      params["R"] = static_cast<double>(*b.R);
    else if (b.id == "power_series")
      params["R"] = "inf";  // the finite slot is only filled for finite radii
    if (b.n) params["n"] = *b.n;
    if (b.id == "power_series" && !b.alpha_text.empty()) params["alpha"] = b.alpha_text;
    if (!params.empty()) j["params"] = params;
  }

  switch (P.kind()) {
    case WeightFamily::Kind::symbolic:
      if (P.symbolic_expr()) j["expr"] = P.symbolic_expr()->str();
      break;
    case WeightFamily::Kind::level_list: {
      nlohmann::json levels = nlohmann::json::array();
      const std::uint64_t n = P.level_count().value_or(0);
      for (std::uint64_t k = 1; k <= n; ++k) levels.push_back(P.level_expr(k)->str());
      j["levels"] = levels;
      break;
    }
    case WeightFamily::Kind::pairwise_product:
      j["pairwise_product"] = true;
      break;
  }
  if (P.level_count()) j["level_count"] = *P.level_count();

  j["flags"] = {{"pointwise_ordered", P.flags().pointwise_ordered},
                {"monotone_in_index", monotonicity_name(P.flags().monotone_in_index)},
                {"all_weights_ge_one", P.flags().all_weights_ge_one}};
  return j;
}

SpaceConfig space_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("space config must be a JSON object");
  std::string name = require_string(j, "name", "space config");
  if (name.empty()) throw ConfigError("space config name must be nonempty");
  SpaceConfig cfg{name, family_from_json(require_field(j, "family", "space config"), name),
                  AnalysisParams{}, nlohmann::json::object()};

  if (j.contains("analysis")) {
    const nlohmann::json& a = j.at("analysis");
    if (!a.is_object()) throw ConfigError("analysis must be an object");
    cfg.analysis.depth = a.value("depth", cfg.analysis.depth);
    cfg.analysis.level_budget = a.value("level_budget", cfg.analysis.level_budget);
    if (a.contains("epsilon"))
      cfg.analysis.epsilon = static_cast<long double>(a.at("epsilon").get<double>());
    if (cfg.analysis.depth == 0 || cfg.analysis.level_budget == 0)
      throw ConfigError("analysis depth and level budget must be positive");
    if (!(cfg.analysis.epsilon > 0.0L))
      throw ConfigError("analysis epsilon must be positive");
  }

  cfg.expected = j.value("expected", nlohmann::json::object());
  if (!cfg.expected.is_object())
    throw ConfigError("expected must be an object when present");

  Verdict ax = axioms_check(cfg.family, std::min<std::uint64_t>(cfg.analysis.depth, 256));
  if (ax.fails())
    throw ConfigError("family violates the weight axioms: " + ax.detail);
  return cfg;
}

SpaceConfig load_space_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open space config: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed JSON in " + path + ": " + e.what());
  }
  return space_config_from_json(j);
}

nlohmann::json SpaceConfig::to_json() const {
  return {{"name", name},
          {"family", family_to_json(family)},
          {"analysis",
           {{"depth", analysis.depth},
            {"level_budget", analysis.level_budget},
            {"epsilon", static_cast<double>(analysis.epsilon)}}},
          {"expected", expected}};
}

std::vector<SpaceConfig> golden_catalog() {
  auto entry = [](std::string name, const std::string& builtin_id,
                  const nlohmann::json& params, nlohmann::json expected) {
    return SpaceConfig{std::move(name), make_builtin(builtin_id, params), AnalysisParams{},
                       std::move(expected)};
  };

  std::vector<SpaceConfig> out;
  out.push_back(entry(
      "l1", "l1", nlohmann::json::object(),
      {{"dims", {{"dg", "2"}, {"db", "2"}, {"wdg", "2"}, {"wdb", "2"}}},
       {"witnesses", {{"dg", "lambda_inf(P)"}}},
       {"conditions",
        {{"U", "fails"}, {"N", "fails"}, {"B", "holds"}, {"M", "holds"}}}}));
  out.push_back(entry(
      "s", "s", nlohmann::json::object(),
      {{"dims", {{"dg", "1"}, {"db", "1"}, {"wdg", "1"}, {"wdb", "1"}}},
       {"witnesses", {{"dg", "C"}}},
       {"conditions",
        {{"U", "fails"}, {"N", "holds"}, {"B", "holds"}, {"M", "holds"}}}}));
  out.push_back(entry(
      "entire", "entire", nlohmann::json::object(),
      {{"dims", {{"dg", "1"}, {"db", "1"}, {"wdg", "1"}, {"wdb", "1"}}},
       {"witnesses", {{"dg", "C"}}},
       {"conditions",
        {{"U", "fails"}, {"N", "holds"}, {"B", "holds"}, {"M", "holds"}}}}));
  out.push_back(entry(
      "hadamard_disk_1", "hadamard_disk", {{"R", 1.0}},
      {{"dims", {{"dg", "0"}, {"db", "0"}, {"wdg", "0"}, {"wdb", "0"}}},
       {"conditions",
        {{"U", "holds"}, {"N", "holds"}, {"B", "holds"}, {"M", "holds"}}},
       {"triviality",
        {{"unital", "yes"},
         {"contractible", "yes"},
         {"amenable", "yes"},
         {"biprojective", "yes"},
         {"biflat", "yes"},
         {"approximately_contractible", "yes"}}}}));
  out.push_back(entry(
      "hadamard_disk_2", "hadamard_disk", {{"R", 2.0}},
      {{"dims",
        {{"dg", "infinity"}, {"db", "infinity"}, {"wdg", "infinity"}, {"wdb", "infinity"}}},
       {"witnesses", {{"dg", "C"}}},
       {"conditions", {{"U", "fails"}, {"B", "fails"}}}}));
  out.push_back(entry(
      "matrix_example", "matrix_example", nlohmann::json::object(),
      {{"dims", {{"dg", "2"}, {"db", "2"}, {"wdg", "1"}, {"wdb", "1"}}},
       {"witnesses", {{"dg", "lambda(bar(P))"}, {"wdg", "C"}}},
       {"conditions",
        {{"U", "fails"}, {"N", "holds"}, {"B", "holds"}, {"M", "fails"}}}}));
  out.push_back(entry(
      "finite_dim_64", "finite_dim", {{"n", 64}},
      {{"dims", {{"dg", "0"}, {"db", "0"}, {"wdg", "0"}, {"wdb", "0"}}},
       {"conditions",
        {{"U", "holds"}, {"N", "holds"}, {"B", "holds"}, {"M", "holds"}}},
       {"triviality",
        {{"unital", "yes"},
         {"contractible", "yes"},
         {"amenable", "yes"},
         {"biprojective", "yes"},
         {"biflat", "yes"},
         {"approximately_contractible", "yes"}}}}));
  return out;
}

}  // namespace koethe
