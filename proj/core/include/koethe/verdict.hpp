#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

namespace koethe {

enum class Outcome { holds, fails, unknown };
enum class Tier { exact, empirical };

// Three-valued answer to an analytic question.  `holds`/`fails` at the
// exact tier are backed by a replayable certificate (a named rule plus
// its data); the empirical tier carries prefix evidence only and claims
// nothing beyond `unknown`, except for divergence witnessed by provably
// monotone unbounded partial sums.
struct Verdict {
  Outcome outcome = Outcome::unknown;
  Tier tier = Tier::empirical;
  std::uint64_t depth = 0;
  std::string rule;    // certificate rule id, e.g. "power-grid", "uniform-shift"
  std::string detail;  // human-readable note
  nlohmann::json certificate = nlohmann::json::object();

  bool holds() const { return outcome == Outcome::holds; }
  bool fails() const { return outcome == Outcome::fails; }
  bool unknown() const { return outcome == Outcome::unknown; }
  bool exact() const { return tier == Tier::exact; }

  static Verdict holds_exact(std::string rule, std::uint64_t depth,
                             std::string detail = {},
                             nlohmann::json cert = nlohmann::json::object());
  static Verdict fails_exact(std::string rule, std::uint64_t depth,
                             std::string detail = {},
                             nlohmann::json cert = nlohmann::json::object());
  static Verdict unknown_at(std::uint64_t depth, std::string detail = {},
                            nlohmann::json evidence = nlohmann::json::object());
};

const char* outcome_name(Outcome o);
const char* tier_name(Tier t);

void to_json(nlohmann::json& j, const Verdict& v);

}  // namespace koethe
