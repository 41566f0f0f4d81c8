#include "koethe/verdict.hpp"

namespace koethe {

Verdict Verdict::holds_exact(std::string rule, std::uint64_t depth, std::string detail,
                             nlohmann::json cert) {
  Verdict v;
  v.outcome = Outcome::holds;
  v.tier = Tier::exact;
  v.depth = depth;
  v.rule = std::move(rule);
  v.detail = std::move(detail);
  v.certificate = std::move(cert);
  return v;
}

Verdict Verdict::fails_exact(std::string rule, std::uint64_t depth, std::string detail,
                             nlohmann::json cert) {
  Verdict v;
  v.outcome = Outcome::fails;
  v.tier = Tier::exact;
  v.depth = depth;
  v.rule = std::move(rule);
  v.detail = std::move(detail);
  v.certificate = std::move(cert);
  return v;
}

Verdict Verdict::unknown_at(std::uint64_t depth, std::string detail, nlohmann::json evidence) {
  Verdict v;
  v.outcome = Outcome::unknown;
  v.tier = Tier::empirical;
  v.depth = depth;
  v.detail = std::move(detail);
  v.certificate = std::move(evidence);
  return v;
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::holds: return "holds";
    case Outcome::fails: return "fails";
    case Outcome::unknown: return "unknown";
  }
  return "";
}

const char* tier_name(Tier t) {
  switch (t) {
    case Tier::exact: return "exact";
    case Tier::empirical: return "empirical";
  }
  return "";
}

void to_json(nlohmann::json& j, const Verdict& v) {
  j = nlohmann::json{{"outcome", outcome_name(v.outcome)},
                     {"tier", tier_name(v.tier)},
                     {"depth", v.depth},
                     {"rule", v.rule},
                     {"detail", v.detail},
                     {"certificate", v.certificate}};
}

}  // namespace koethe
