// Weight families: builtin catalog values, derived families, axiom
// checking, and the JSON space-config layer.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "koethe/space_config.hpp"
#include "koethe/weight_family.hpp"

using namespace koethe;
using nlohmann::json;

namespace {

double wlog(const WeightFamily& P, std::uint64_t k, std::uint64_t rank) {
  return P.weight_at_rank(k, rank).log_d();
}

}  // namespace

TEST_CASE("builtin weight values are the hand-computed ones") {
  SUBCASE("l1: one level, all ones") {
    WeightFamily P = make_builtin("l1", json::object());
    CHECK(P.level_count() == 1);
    CHECK(P.capped_level_count(8) == 1);
    CHECK(wlog(P, 1, 1) == 0.0);
    CHECK(wlog(P, 1, 9999) == 0.0);
    CHECK(P.flags().all_weights_ge_one);
    CHECK_THROWS_AS(P.weight_at_rank(2, 1), ConfigError);  // past the level list
  }

  SUBCASE("s: i^k") {
    WeightFamily P = make_builtin("s", json::object());
    CHECK_FALSE(P.level_count().has_value());
    CHECK(P.capped_level_count(8) == 8);
    CHECK(wlog(P, 2, 3) == doctest::Approx(std::log(9.0)).epsilon(1e-15));
    CHECK(wlog(P, 1, 5) == doctest::Approx(std::log(5.0)).epsilon(1e-15));
    CHECK(wlog(P, 4, 1) == 0.0);
    REQUIRE(P.symbolic_expr() != nullptr);
  }

  SUBCASE("entire: level radius m") {
    WeightFamily P = make_builtin("entire", json::object());
    REQUIRE(P.power_grid().has_value());
    CHECK(P.power_grid()->infinite_radius);
    CHECK(wlog(P, 2, 3) == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-15));
    CHECK(wlog(P, 1, 7) == 0.0);  // 1^7
  }

  SUBCASE("hadamard_disk(R): level radius R*m/(m+1)") {
    WeightFamily P = make_builtin("hadamard_disk", {{"R", 1.0}});
    REQUIRE(P.power_grid().has_value());
    CHECK(P.power_grid()->radius == doctest::Approx(1.0));
    CHECK(wlog(P, 1, 2) == doctest::Approx(std::log(0.25)).epsilon(1e-14));
    CHECK(wlog(P, 2, 3) == doctest::Approx(3.0 * std::log(2.0 / 3.0)).epsilon(1e-14));
    CHECK_FALSE(P.flags().all_weights_ge_one);

    WeightFamily H2 = make_builtin("hadamard_disk", {{"R", 2.0}});
    CHECK(wlog(H2, 1, 4) == 0.0);  // radius 2*1/2 = 1
    CHECK(wlog(H2, 3, 2) == doctest::Approx(2.0 * std::log(1.5)).epsilon(1e-14));

    CHECK_THROWS_AS(make_builtin("hadamard_disk", {{"R", 0.0}}), ConfigError);
    CHECK_THROWS_AS(make_builtin("hadamard_disk", {{"R", "inf"}}), ConfigError);
  }

  SUBCASE("power_series accepts finite and infinite radii") {
    WeightFamily P = make_builtin("power_series", {{"R", 2.0}, {"alpha", "i"}});
    CHECK(wlog(P, 1, 3) == doctest::Approx(3.0 * std::log(1.0)).epsilon(1e-14));
    CHECK(wlog(P, 3, 2) == doctest::Approx(2.0 * std::log(1.5)).epsilon(1e-14));
    WeightFamily Q = make_builtin("power_series", {{"R", "inf"}, {"alpha", "i"}});
    CHECK(wlog(Q, 3, 2) == doctest::Approx(2.0 * std::log(3.0)).epsilon(1e-14));
    CHECK_THROWS_AS(make_builtin("power_series", {{"R", 2.0}, {"alpha", "j"}}),
                    ConfigError);
  }

  SUBCASE("matrix example: the two-regime pair formula") {
    WeightFamily P = make_builtin("matrix_example", json::object());
    CHECK(P.index_set().kind() == IndexSet::Kind::natural_pairs);
    // i <= k regime at k=2, (i,j) = (1,2): 2^((2*2)^1) * 3^2 = 144.
    CHECK(P.weight(2, Index{1, 2}).log() ==
          doctest::Approx(std::log(144.0)).epsilon(1e-14));
    // i > k regime at k=1, (i,j) = (2,3): (2+3)^1 = 5.
    CHECK(P.weight(1, Index{2, 3}).log() ==
          doctest::Approx(std::log(5.0)).epsilon(1e-14));
    CHECK(P.flags().all_weights_ge_one);
    CHECK(P.flags().pointwise_ordered);
  }

  SUBCASE("finite_dim") {
    WeightFamily P = make_builtin("finite_dim", {{"n", 64}});
    CHECK(P.index_set().count() == 64);
    CHECK(wlog(P, 1, 64) == 0.0);
    CHECK_THROWS_AS(P.weight_at_rank(1, 65), ConfigError);
    CHECK_THROWS_AS(make_builtin("finite_dim", json::object()), ConfigError);
  }

  CHECK_THROWS_AS(make_builtin("no_such_family", json::object()), ConfigError);
}

TEST_CASE("derived families") {
  WeightFamily s = make_builtin("s", json::object());

  SUBCASE("square doubles every log weight") {
    WeightFamily s2 = square(s);
    CHECK(s2.derived() == WeightFamily::Derived::square_of);
    for (std::uint64_t k = 1; k <= 4; ++k)
      for (std::uint64_t i = 1; i <= 20; ++i)
        CHECK(wlog(s2, k, i) == doctest::Approx(2.0 * wlog(s, k, i)).epsilon(1e-13));
    REQUIRE(s2.parent() != nullptr);
    CHECK(s2.parent()->name() == "s");
  }

  SUBCASE("bar clamps at one") {
    WeightFamily bs = bar_family(s);
    for (std::uint64_t k = 1; k <= 4; ++k)
      for (std::uint64_t i = 1; i <= 20; ++i) CHECK(wlog(bs, k, i) == 0.0);

    WeightFamily hh = make_builtin("hadamard_disk", {{"R", 0.5}});
    WeightFamily bh = bar_family(hh);
    // All weights already below 1: the bar is invisible.
    for (std::uint64_t k = 1; k <= 4; ++k)
      for (std::uint64_t i = 1; i <= 20; ++i)
        CHECK(wlog(bh, k, i) == doctest::Approx(wlog(hh, k, i)).epsilon(1e-15));
  }

  SUBCASE("products enumerate level pairs in Cantor order") {
    WeightFamily p = product_family(s, s);
    // Pair rank 1 = (1,1): i^1 * i^1; rank 2 = (1,2): i^1 * i^2.
    CHECK(wlog(p, 1, 3) == doctest::Approx(2.0 * std::log(3.0)).epsilon(1e-13));
    CHECK(wlog(p, 2, 3) == doctest::Approx(3.0 * std::log(3.0)).epsilon(1e-13));
    CHECK(wlog(p, 3, 3) == doctest::Approx(3.0 * std::log(3.0)).epsilon(1e-13));
    WeightFamily l1 = make_builtin("l1", json::object());
    CHECK_THROWS_AS(product_family(s, make_builtin("matrix_example", json::object())),
                    ConfigError);
    CHECK(product_family(l1, l1).level_count() == 1);
  }
}

TEST_CASE("axiom checking") {
  const char* ids[] = {"l1", "s", "entire", "matrix_example"};
  for (const char* id : ids) {
    CAPTURE(id);
    CHECK(axioms_check(make_builtin(id, json::object()), 128).holds());
  }
  CHECK(axioms_check(make_builtin("hadamard_disk", {{"R", 0.5}}), 128).holds());
  CHECK(axioms_check(make_builtin("finite_dim", {{"n", 8}}), 128).holds());

  SUBCASE("a flag that contradicts evaluation fails") {
    FamilyFlags lying;
    lying.monotone_in_index = IndexMonotonicity::nonincreasing;
    WeightFamily P =
        WeightFamily::from_expr(IndexSet::naturals(), dsl::parse("i^k"), lying);
    CHECK(axioms_check(P, 64).fails());
  }

  SUBCASE("two incomparable levels with no dominating third stay undecided") {
    // Level 1 favors late indices, level 2 early ones; nothing dominates both.
    std::vector<dsl::ExprPtr> levels = {dsl::parse("i"), dsl::parse("100/i")};
    WeightFamily P = WeightFamily::from_levels(IndexSet::naturals(), levels, {});
    Verdict v = axioms_check(P, 64);
    CHECK(v.unknown());
  }
}

TEST_CASE("expression-defined families validate on construction") {
  CHECK_THROWS_AS(
      WeightFamily::from_expr(IndexSet::naturals(), dsl::parse("j^k"), {}),
      ConfigError);
  CHECK_THROWS_AS(
      WeightFamily::from_expr(IndexSet::naturals(), dsl::parse("i-100"), {}),
      ConfigError);
  CHECK_NOTHROW(
      WeightFamily::from_expr(IndexSet::natural_pairs(), dsl::parse("(i+j)^k"), {}));

  WeightFamily P = WeightFamily::from_expr(IndexSet::naturals(), dsl::parse("i^k"), {});
  CHECK_FALSE(P.level_count().has_value());
  WeightFamily C = WeightFamily::from_expr(IndexSet::naturals(), dsl::parse("i+1"), {});
  CHECK(C.level_count() == 1);  // no level variable, a single weight
}

TEST_CASE("monotonicity names round-trip") {
  for (IndexMonotonicity m : {IndexMonotonicity::nondecreasing,
                              IndexMonotonicity::nonincreasing, IndexMonotonicity::none}) {
    auto back = monotonicity_from_name(monotonicity_name(m));
    REQUIRE(back.has_value());
    CHECK(*back == m);
  }
  CHECK_FALSE(monotonicity_from_name("sideways").has_value());
}

TEST_CASE("space configs") {
  SUBCASE("builtin form") {
    json j = {{"name", "probe"},
              {"family", {{"builtin", "hadamard_disk"}, {"params", {{"R", 1.0}}}}},
              {"analysis", {{"depth", 500}, {"level_budget", 4}, {"epsilon", 1e-8}}}};
    SpaceConfig cfg = space_config_from_json(j);
    CHECK(cfg.name == "probe");
    CHECK(cfg.analysis.depth == 500);
    CHECK(cfg.analysis.level_budget == 4);
    CHECK(cfg.analysis.epsilon == doctest::Approx(1e-8));
    CHECK(cfg.expected.empty());
    CHECK(cfg.to_json()["analysis"]["depth"] == 500);
  }

  SUBCASE("DSL form with flags") {
    json j = {{"name", "powers"},
              {"family",
               {{"index_set", {{"kind", "naturals"}}},
                {"expr", "i^k"},
                {"flags",
                 {{"pointwise_ordered", true},
                  {"monotone_in_index", "nondecreasing"},
                  {"all_weights_ge_one", true}}}}}};
    SpaceConfig cfg = space_config_from_json(j);
    CHECK(cfg.analysis.depth == 10000);  // defaults
    CHECK(cfg.family.flags().pointwise_ordered);
    CHECK(cfg.family.weight_at_rank(3, 2).log() ==
          doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-14));
  }

  SUBCASE("level-list form") {
    json j = {{"name", "two-levels"},
              {"family",
               {{"index_set", {{"kind", "naturals"}}},
                {"levels", json::array({"1", "i"})},
                {"flags", {{"pointwise_ordered", true}}}}}};
    SpaceConfig cfg = space_config_from_json(j);
    CHECK(cfg.family.level_count() == 2);
  }

  SUBCASE("malformed configs are rejected with the offending field named") {
    auto reject = [](json j) {
      CHECK_THROWS_AS(space_config_from_json(j), ConfigError);
    };
    reject(json::array());
    reject({{"family", {{"builtin", "s"}}}});                        // no name
    reject({{"name", ""}, {"family", {{"builtin", "s"}}}});          // empty name
    reject({{"name", "x"}});                                         // no family
    reject({{"name", "x"}, {"family", {{"builtin", "nope"}}}});      // bad builtin
    reject({{"name", "x"}, {"family", {{"expr", "i"}}}});            // no index_set
    reject({{"name", "x"},
            {"family", {{"builtin", "s"}}},
            {"analysis", {{"depth", 0}}}});                          // zero depth
    reject({{"name", "x"},
            {"family", {{"builtin", "s"}}},
            {"analysis", {{"epsilon", -1.0}}}});                     // bad epsilon
    reject({{"name", "x"},
            {"family",
             {{"index_set", {{"kind", "naturals"}}}, {"expr", "i*"}}}});  // parse error
  }

  SUBCASE("family JSON round-trips through the parser") {
    WeightFamily P = make_builtin("hadamard_disk", {{"R", 2.0}});
    json fam = family_to_json(P);
    CHECK(fam["builtin"] == "hadamard_disk");
    CHECK(fam["params"]["R"] == doctest::Approx(2.0));
    json cfg = {{"name", "roundtrip"}, {"family", fam}};
    SpaceConfig back = space_config_from_json(cfg);
    CHECK(back.family.power_grid()->radius == doctest::Approx(2.0));

    // An unbounded-radius grid keeps its radius marker through the trip.
    WeightFamily ps = make_builtin("power_series", {{"R", "inf"}, {"alpha", "i"}});
    json fam2 = family_to_json(ps);
    CHECK(fam2["params"]["R"] == "inf");
    SpaceConfig back2 = space_config_from_json({{"name", "rt2"}, {"family", fam2}});
    CHECK(back2.family.power_grid()->infinite_radius);
  }
}

TEST_CASE("the shipped catalog") {
  std::vector<SpaceConfig> cat = golden_catalog();
  REQUIRE(cat.size() == 7);
  CHECK(cat[0].name == "l1");
  CHECK(cat[1].name == "s");
  CHECK(cat[2].name == "entire");
  CHECK(cat[3].name == "hadamard_disk_1");
  CHECK(cat[4].name == "hadamard_disk_2");
  CHECK(cat[5].name == "matrix_example");
  CHECK(cat[6].name == "finite_dim_64");
  for (const SpaceConfig& cfg : cat) {
    CAPTURE(cfg.name);
    CHECK_FALSE(cfg.expected.empty());
    CHECK(axioms_check(cfg.family, 128).holds());
  }
}
