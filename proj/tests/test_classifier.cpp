// Decision-table classifier: totality over all condition combinations,
// the triviality flags, and the profile consistency checker.  The tables
// are restated here independently, value by value.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "koethe/classifier.hpp"

using namespace koethe;

namespace {

Verdict make(Outcome o) {
  Verdict v;
  v.outcome = o;
  v.tier = Tier::exact;
  v.depth = 100;
  v.rule = "synthetic";
  return v;
}

ConditionProfile profile(Outcome u, Outcome n, Outcome b, Outcome m,
                         std::string name = "synthetic") {
  ConditionProfile c;
  c.source_name = std::move(name);
  c.depth = 100;
  c.level_budget = 8;
  c.algebra = make(Outcome::holds);
  c.U = make(u);
  c.N = make(n);
  c.B = make(b);
  c.M = make(m);
  return c;
}

constexpr Outcome H = Outcome::holds;
constexpr Outcome F = Outcome::fails;
constexpr Outcome UNK = Outcome::unknown;

}  // namespace

TEST_CASE("all sixteen condition combinations classify or are rejected") {
  int classified = 0, rejected = 0;
  for (Outcome u : {H, F})
    for (Outcome n : {H, F})
      for (Outcome b : {H, F})
        for (Outcome m : {H, F}) {
          ConditionProfile c = profile(u, n, b, m);
          const bool inconsistent =
              u == H && (n == F || b == F || m == F);
          if (inconsistent) {
            CHECK_THROWS_AS(classify(c), PreconditionError);
            ++rejected;
            continue;
          }
          HomologicalProfile h = classify(c);
          ++classified;

          // Independent statement of the two tables.
          Dim weak, strong;
          std::string weak_wit, strong_wit;
          if (u == H) {
            weak = strong = Dim::zero;
          } else if (b == F) {
            weak = strong = Dim::infinite_dim;
            weak_wit = strong_wit = "C";
          } else if (n == F) {
            weak = strong = Dim::two;
            weak_wit = strong_wit = "lambda_inf(P)";
          } else if (m == H) {
            weak = strong = Dim::one;
            weak_wit = strong_wit = "C";
          } else {
            weak = Dim::one;
            weak_wit = "C";
            strong = Dim::two;
            strong_wit = "lambda(bar(P))";
          }

          CAPTURE(static_cast<int>(u));
          CAPTURE(static_cast<int>(n));
          CAPTURE(static_cast<int>(b));
          CAPTURE(static_cast<int>(m));
          CHECK(h.wdg.value == weak);
          CHECK(h.wdb.value == weak);
          CHECK(h.dg.value == strong);
          CHECK(h.db.value == strong);
          if (weak != Dim::zero) {
            CHECK(h.wdg.witness == weak_wit);
            CHECK(h.dg.witness == strong_wit);
          }
          CHECK_FALSE(h.dg.case_text.empty());
          CHECK(consistency_check(h).empty());
        }
  CHECK(classified == 9);
  CHECK(rejected == 7);
}

TEST_CASE("unknowns block only the branches that need them") {
  SUBCASE("a failing square equivalence decides everything by itself") {
    HomologicalProfile h = classify(profile(UNK, UNK, F, UNK));
    CHECK(h.dg.value == Dim::infinite_dim);
    CHECK(h.wdg.value == Dim::infinite_dim);
    CHECK(h.dg.witness == "C");
  }

  SUBCASE("an unknown square equivalence blocks") {
    HomologicalProfile h = classify(profile(F, H, UNK, H));
    CHECK(h.dg.value == Dim::unknown);
    CHECK(h.wdg.value == Dim::unknown);
    CHECK_FALSE(h.dg.case_text.empty());
  }

  SUBCASE("the strong table needs the splitting verdict, the weak one does not") {
    HomologicalProfile h = classify(profile(F, H, H, UNK));
    CHECK(h.wdg.value == Dim::one);
    CHECK(h.dg.value == Dim::unknown);
  }

  SUBCASE("dimension equalities hold under every verdict assignment") {
    for (Outcome u : {H, F, UNK})
      for (Outcome n : {H, F, UNK})
        for (Outcome b : {H, F, UNK})
          for (Outcome m : {H, F, UNK}) {
            ConditionProfile c = profile(u, n, b, m);
            HomologicalProfile h;
            try {
              h = classify(c);
            } catch (const PreconditionError&) {
              continue;
            }
            CHECK(h.dg.value == h.db.value);
            CHECK(h.wdg.value == h.wdb.value);
            CHECK(consistency_check(h).empty());
          }
  }
}

TEST_CASE("triviality flags") {
  SUBCASE("an identity element trivializes everything") {
    TrivialityFlags f = triviality_flags(profile(H, H, H, H));
    CHECK(f.unital == TriBool::yes);
    CHECK(f.contractible == TriBool::yes);
    CHECK(f.amenable == TriBool::yes);
    CHECK(f.biprojective == TriBool::yes);
    CHECK(f.biflat == TriBool::yes);
    CHECK(f.approximately_contractible == TriBool::yes);
  }

  SUBCASE("the square equivalence drives biprojectivity and biflatness") {
    TrivialityFlags f = triviality_flags(profile(F, H, H, H));
    CHECK(f.unital == TriBool::no);
    CHECK(f.contractible == TriBool::no);
    CHECK(f.amenable == TriBool::no);
    CHECK(f.biprojective == TriBool::yes);
    CHECK(f.biflat == TriBool::yes);
    CHECK(f.approximately_contractible == TriBool::yes);
  }

  SUBCASE("without the summable-quotient condition the approximate flag is open") {
    TrivialityFlags f = triviality_flags(profile(F, F, H, H));
    CHECK(f.biprojective == TriBool::yes);
    CHECK(f.approximately_contractible == TriBool::unknown);
  }

  SUBCASE("the flat-weights family is the curated negative") {
    TrivialityFlags f = triviality_flags(profile(F, F, H, H, "l1"));
    CHECK(f.approximately_contractible == TriBool::no);
  }

  SUBCASE("unknown verdicts leave flags unknown") {
    TrivialityFlags f = triviality_flags(profile(UNK, UNK, UNK, UNK));
    CHECK(f.unital == TriBool::unknown);
    CHECK(f.biprojective == TriBool::unknown);
  }
}

TEST_CASE("consistency violations are reported") {
  HomologicalProfile h = classify(profile(F, H, H, H));

  SUBCASE("weak may not exceed strong") {
    HomologicalProfile bad = h;
    bad.dg.value = Dim::one;
    bad.db.value = Dim::one;
    bad.wdg.value = Dim::two;
    bad.wdb.value = Dim::two;
    CHECK_FALSE(consistency_check(bad).empty());
  }

  SUBCASE("strong pair must agree") {
    HomologicalProfile bad = h;
    bad.db.value = Dim::two;
    CHECK_FALSE(consistency_check(bad).empty());
  }

  SUBCASE("biprojectivity caps the bidimension at two") {
    HomologicalProfile bad = h;
    bad.flags.biprojective = TriBool::yes;
    bad.dg.value = bad.db.value = Dim::infinite_dim;
    bad.wdg.value = bad.wdb.value = Dim::infinite_dim;
    CHECK_FALSE(consistency_check(bad).empty());
  }

  SUBCASE("biflatness caps the weak dimension at two") {
    HomologicalProfile bad = h;
    bad.flags.biflat = TriBool::yes;
    bad.wdg.value = bad.wdb.value = Dim::infinite_dim;
    bad.dg.value = bad.db.value = Dim::infinite_dim;
    bad.flags.biprojective = TriBool::no;
    CHECK_FALSE(consistency_check(bad).empty());
  }
}

TEST_CASE("names and serialization") {
  CHECK(std::string(dim_name(Dim::zero)) == "0");
  CHECK(std::string(dim_name(Dim::one)) == "1");
  CHECK(std::string(dim_name(Dim::two)) == "2");
  CHECK(std::string(dim_name(Dim::infinite_dim)) == "infinity");
  CHECK(std::string(dim_name(Dim::unknown)) == "unknown");
  CHECK(std::string(tribool_name(TriBool::yes)) == "yes");

  HomologicalProfile h = classify(profile(F, F, H, H, "l1"));
  nlohmann::json j = h.to_json();
  CHECK(j["dg"]["value"] == "2");
  CHECK(j["dg"]["witness"] == "lambda_inf(P)");
  CHECK(j["flags"]["approximately_contractible"] == "no");
  CHECK(j.contains("wdb"));
}
