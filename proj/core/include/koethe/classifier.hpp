#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "koethe/conditions.hpp"

namespace koethe {

enum class Dim { zero, one, two, infinite_dim, unknown };
const char* dim_name(Dim d);

enum class TriBool { yes, no, unknown };
const char* tribool_name(TriBool t);

// One classified invariant: the value, the decision-table branch that
// produced it, and the module exhibiting the extreme dimension.
struct DimResult {
  Dim value = Dim::unknown;
  std::string case_text;  // which branch fired, in words
  std::string witness;    // "C" | "lambda_inf(P)" | "lambda(bar(P))" | ""
};

struct TrivialityFlags {
  TriBool unital = TriBool::unknown;
  TriBool contractible = TriBool::unknown;
  TriBool amenable = TriBool::unknown;
  TriBool biprojective = TriBool::unknown;
  TriBool biflat = TriBool::unknown;
  TriBool approximately_contractible = TriBool::unknown;
};

struct HomologicalProfile {
  DimResult dg;   // projective global dimension
  DimResult db;   // projective bidimension
  DimResult wdg;  // weak (flat) global dimension
  DimResult wdb;  // weak bidimension
  TrivialityFlags flags;

  nlohmann::json to_json() const;
};

// Decision-table lookups over a condition profile.  Both throw
// PreconditionError on summability-inconsistent input (U Holds while one
// of N, B, M Fails) — such profiles cannot come from a real family.
DimResult classify_weak(const ConditionProfile& c);
DimResult classify_strong(const ConditionProfile& c);

TrivialityFlags triviality_flags(const ConditionProfile& c);

// Full profile: strong pair, weak pair, flags.
HomologicalProfile classify(const ConditionProfile& c);

// Every relation the theory guarantees between profile entries, as
// human-readable violations (empty = consistent): dg == db, wdg == wdb,
// wdg <= dg, wdb <= db, biprojective -> db <= 2, biflat -> wdg <= 2, and
// agreement of the unital/contractible/amenable flags.  Whether biflat
// alone bounds wdb is unsettled, so no such assertion is made.
std::vector<std::string> consistency_check(const HomologicalProfile& h);

}  // namespace koethe
