// The four structural conditions and the splitting-matrix machinery,
// with independent numeric replays of every curated fact.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "koethe/conditions.hpp"
#include "koethe/weight_family.hpp"

using namespace koethe;
using nlohmann::json;

namespace {

const std::uint64_t kDepth = 2000;
const std::uint64_t kLevels = 8;

WeightFamily builtin(const char* id, json params = json::object()) {
  return make_builtin(id, params);
}

}  // namespace

TEST_CASE("summability of every level") {
  CHECK(check_U(builtin("s"), kDepth).fails());
  CHECK(check_U(builtin("l1"), kDepth).fails());
  CHECK(check_U(builtin("entire"), kDepth).fails());
  CHECK(check_U(builtin("hadamard_disk", {{"R", 2.0}}), kDepth).fails());
  Verdict u1 = check_U(builtin("hadamard_disk", {{"R", 1.0}}), kDepth);
  CHECK(u1.holds());
  CHECK(u1.exact());
  CHECK(check_U(builtin("finite_dim", {{"n", 64}}), kDepth).holds());
}

TEST_CASE("levelwise summable quotients") {
  CHECK(check_N(builtin("s"), kDepth).holds());
  CHECK(check_N(builtin("entire"), kDepth).holds());
  CHECK(check_N(builtin("hadamard_disk", {{"R", 1.0}}), kDepth).holds());
  Verdict n_l1 = check_N(builtin("l1"), kDepth);
  CHECK(n_l1.fails());
  CHECK(n_l1.exact());

  SUBCASE("the pair family holds, and its majorant replays pointwise") {
    WeightFamily M = builtin("matrix_example");
    Verdict v = check_N(M, kDepth);
    CHECK(v.holds());
    CHECK(v.exact());
    // p^(k) / p^(k+3) <= (i+j)^-3 across both formula regimes.
    for (std::uint64_t k = 1; k <= 5; ++k)
      for (std::uint64_t i = 1; i <= 20; ++i)
        for (std::uint64_t j = 1; j <= 20; ++j) {
          long double ratio =
              M.weight(k, Index{i, j}).log() - M.weight(k + 3, Index{i, j}).log();
          CHECK(ratio <= -3.0L * std::log(static_cast<long double>(i + j)) + 1e-9L);
        }
  }
}

TEST_CASE("square equivalence") {
  CHECK(check_B(builtin("s"), kDepth).holds());
  CHECK(check_B(builtin("l1"), kDepth).holds());
  CHECK(check_B(builtin("entire"), kDepth).holds());
  CHECK(check_B(builtin("hadamard_disk", {{"R", 1.0}}), kDepth).holds());
  Verdict b2 = check_B(builtin("hadamard_disk", {{"R", 2.0}}), kDepth);
  CHECK(b2.fails());
  CHECK(b2.exact());

  SUBCASE("not-an-algebra input is rejected") {
    CHECK_THROWS_AS(check_B(builtin("hadamard_disk", {{"R", 0.5}}), kDepth),
                    PreconditionError);
  }

  SUBCASE("the pair family holds, and its level map replays pointwise") {
    WeightFamily M = builtin("matrix_example");
    Verdict v = check_B(M, kDepth);
    CHECK(v.holds());
    CHECK(v.exact());
    // (p^(k))^2 <= p^(4k) across all three index regimes.
    for (std::uint64_t k = 1; k <= 3; ++k)
      for (std::uint64_t i = 1; i <= 15; ++i)
        for (std::uint64_t j = 1; j <= 15; ++j) {
          long double lhs = 2.0L * M.weight(k, Index{i, j}).log();
          long double rhs = M.weight(4 * k, Index{i, j}).log();
          CHECK(lhs <= rhs + 1e-9L);
        }
  }
}

TEST_CASE("splitting matrices") {
  SUBCASE("power weights: a 0/1 matrix split") {
    MMatrices m = construct_M_matrices(builtin("s"), 64, 16);
    CHECK(m.exact());
    CHECK(m.alpha(3, 5) == doctest::Approx(1.0));
    CHECK(m.alpha(5, 3) == doctest::Approx(0.0));
    CHECK(m.alpha(4, 4) == doctest::Approx(1.0));
    CHECK(m.beta(5, 3) == doctest::Approx(1.0));
    CHECK(m.row_identity_exact(64));
    for (std::uint64_t k = 1; k <= 8; ++k) {
      long double slack = 1.0L;
      CHECK(m.column_bound_exact(k, 64, &slack));
      CHECK(slack <= 0.0L);
      CHECK(m.transpose_bound_exact(k, 64, &slack));
      CHECK(slack <= 0.0L);
    }
  }

  SUBCASE("flat weights: alpha is identically one") {
    MMatrices m = construct_M_matrices(builtin("l1"), 32, 8);
    CHECK(m.exact());
    for (std::uint64_t i = 1; i <= 32; ++i)
      for (std::uint64_t j = 1; j <= 32; ++j) {
        CHECK(m.alpha(i, j) == doctest::Approx(1.0));
        CHECK(m.beta(i, j) == doctest::Approx(0.0));
      }
    CHECK(m.row_identity_exact(32));
    CHECK(m.column_bound_exact(1, 32, nullptr));
    CHECK(m.transpose_bound_exact(1, 32, nullptr));
  }

  SUBCASE("disk weights: the level infimum is certified, not sampled") {
    MMatrices m = construct_M_matrices(builtin("hadamard_disk", {{"R", 1.0}}), 32, 16);
    CHECK(m.exact());
    // j > i: inf over levels of r_m^(j-i) is attained at the first level, r = 1/2.
    CHECK(m.alpha(2, 3) == doctest::Approx(0.5));
    CHECK(m.alpha(2, 4) == doctest::Approx(0.25));
    // j <= i: the infimum is the radius limit, here 1.
    CHECK(m.alpha(3, 2) == doctest::Approx(1.0));
    CHECK(m.row_identity_exact(32));
    for (std::uint64_t k = 1; k <= 8; ++k) {
      CHECK(m.column_bound_exact(k, 32, nullptr));
      CHECK(m.transpose_bound_exact(k, 32, nullptr));
    }
  }

  SUBCASE("hypotheses") {
    CHECK_THROWS_AS(construct_M_matrices(builtin("matrix_example")), PreconditionError);
    WeightFamily wiggly = WeightFamily::from_levels(
        IndexSet::naturals(), {dsl::parse("2 if i == 3 else 1")}, FamilyFlags{});
    CHECK_THROWS_AS(construct_M_matrices(wiggly), PreconditionError);
  }
}

TEST_CASE("splitting condition verdicts") {
  CHECK(check_M(builtin("s"), std::nullopt, kDepth).holds());
  CHECK(check_M(builtin("l1"), std::nullopt, kDepth).holds());
  CHECK(check_M(builtin("entire"), std::nullopt, kDepth).holds());
  CHECK(check_M(builtin("hadamard_disk", {{"R", 1.0}}), std::nullopt, kDepth).holds());

  Verdict vm = check_M(builtin("matrix_example"), std::nullopt, kDepth);
  CHECK(vm.fails());
  CHECK(vm.exact());

  SUBCASE("precomputed matrices are accepted") {
    WeightFamily s = builtin("s");
    MMatrices m = construct_M_matrices(s, 64, 16);
    CHECK(check_M(s, m, kDepth).holds());
  }
}

TEST_CASE("the log-ratio criterion") {
  Verdict vs = check_log_criterion(builtin("s"), kDepth);
  CHECK(vs.holds());
  CHECK(vs.exact());
  Verdict vl = check_log_criterion(builtin("l1"), kDepth);
  CHECK(vl.fails());
  CHECK(vl.exact());
  CHECK(check_log_criterion(builtin("entire"), kDepth).holds());

  CHECK_THROWS_AS(check_log_criterion(builtin("hadamard_disk", {{"R", 1.0}}), kDepth),
                  PreconditionError);  // weights below one
  CHECK_THROWS_AS(check_log_criterion(builtin("matrix_example"), kDepth),
                  PreconditionError);  // pair index set
}

TEST_CASE("full condition profiles") {
  SUBCASE("rapidly decreasing sequences") {
    ConditionProfile c = profile_conditions(builtin("s"), kDepth, kLevels);
    CHECK(c.algebra.holds());
    CHECK(c.U.fails());
    CHECK(c.N.holds());
    CHECK(c.B.holds());
    CHECK(c.M.holds());
    CHECK(c.propagation_notes.empty());
    json j = c.to_json();
    CHECK(j["source"] == "s");
    CHECK(j["U"]["outcome"] == "fails");
    CHECK(j["depth"] == kDepth);
  }

  SUBCASE("unital disk: every oracle answers on its own") {
    ConditionProfile c =
        profile_conditions(builtin("hadamard_disk", {{"R", 1.0}}), kDepth, kLevels);
    CHECK(c.U.holds());
    CHECK(c.N.holds());
    CHECK(c.B.holds());
    CHECK(c.M.holds());
    CHECK(c.propagation_notes.empty());  // nothing was left to upgrade
  }

  SUBCASE("an exact failure flows back into an undecided summability verdict") {
    // Weights i^-i + 1 defeat the series catalog, so (U) alone is
    // undecided; the second level is never summable against the first,
    // so (N) fails exactly and the contrapositive settles (U).
    FamilyFlags flags;
    flags.pointwise_ordered = true;
    flags.all_weights_ge_one = true;
    WeightFamily P = WeightFamily::from_levels(
        IndexSet::naturals(),
        {dsl::parse("i^(-i)+1"), dsl::parse("(i^(-i)+1)*i")}, flags, "stubborn");
    ConditionProfile c = profile_conditions(P, kDepth, kLevels);
    CHECK(c.N.fails());
    CHECK(c.N.exact());
    CHECK(c.U.fails());
    CHECK(c.U.rule == "summability-contrapositive");
    REQUIRE_FALSE(c.propagation_notes.empty());
    CHECK(c.propagation_notes.front().find("(U) downgraded") != std::string::npos);
  }

  SUBCASE("non-algebras are rejected up front") {
    CHECK_THROWS_AS(
        profile_conditions(builtin("hadamard_disk", {{"R", 0.5}}), kDepth, kLevels),
        PreconditionError);
  }

  SUBCASE("the pair family") {
    ConditionProfile c = profile_conditions(builtin("matrix_example"), kDepth, kLevels);
    CHECK(c.U.fails());
    CHECK(c.N.holds());
    CHECK(c.B.holds());
    CHECK(c.M.fails());
  }
}
