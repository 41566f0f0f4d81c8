// Expression DSL, log-domain scalars, index enumeration, and the
// multiplicative canonicalizer.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "koethe/canon.hpp"
#include "koethe/expr.hpp"
#include "koethe/index_set.hpp"
#include "koethe/log_value.hpp"

using namespace koethe;
using dsl::Bindings;
using dsl::Expr;
using dsl::parse;
using dsl::Var;

namespace {

long double eval_at(const char* text, long double i, long double j = 1.0L,
                    long double k = 1.0L) {
  Bindings b;
  b.i = i;
  b.j = j;
  b.k = k;
  return parse(text)->eval(b).value();
}

}  // namespace

TEST_CASE("log-domain scalar arithmetic") {
  LogValue two = LogValue::from_value(2.0L);
  LogValue three = LogValue::from_value(3.0L);

  CHECK((two * three).value() == doctest::Approx(6.0).epsilon(1e-15));
  CHECK((three / two).value() == doctest::Approx(1.5).epsilon(1e-15));
  CHECK((two + three).value() == doctest::Approx(5.0).epsilon(1e-14));

  SUBCASE("zero and infinity conventions") {
    LogValue z = LogValue::zero();
    LogValue inf = LogValue::infinity();
    CHECK(z.is_zero());
    CHECK((two / z).is_infinite());   // x/0 = inf
    CHECK((z / z).is_infinite());     // 0/0 = inf by the same convention
    CHECK((z * inf).is_zero());       // annihilation in a product
    CHECK((two + inf).is_infinite());
    CHECK((z + two) == two);          // exact at the extremes
    CHECK((inf / two).is_infinite());
    CHECK((two / inf).is_zero());
  }

  SUBCASE("powers") {
    CHECK(LogValue::zero().pow(0.0L) == LogValue::one());      // 0^0 = 1
    CHECK(LogValue::zero().pow(-1.0L).is_infinite());          // 0^-1 = inf
    CHECK(LogValue::infinity().pow(0.0L) == LogValue::one());
    CHECK(two.pow(10.0L).value() == doctest::Approx(1024.0).epsilon(1e-14));
    // Halving a log is exact in binary floating point.
    LogValue x = LogValue::from_log(-123.456L);
    CHECK(x.pow(0.5L).log() * 2.0L == x.log());
  }

  SUBCASE("ordering is plain log ordering") {
    CHECK(LogValue::zero() < two);
    CHECK(two < three);
    CHECK(three < LogValue::infinity());
    CHECK(LogValue::max(two, three) == three);
    CHECK(LogValue::min(two, LogValue::zero()).is_zero());
  }

  SUBCASE("log-sum-exp stays finite when naive exp would overflow") {
    LogValue a = LogValue::from_log(12000.0L);
    LogValue b = LogValue::from_log(11999.0L);
    long double expected = 12000.0L + std::log1p(std::exp(-1.0L));
    CHECK((a + b).log() == doctest::Approx(static_cast<double>(expected)).epsilon(1e-18));
  }
}

TEST_CASE("index enumeration") {
  IndexSet nat = IndexSet::naturals();
  CHECK(nat.at(7).i == 7);
  CHECK(nat.at(7).j == 0);
  CHECK_FALSE(nat.count().has_value());

  SUBCASE("pair order: ascending i+j, then ascending i") {
    IndexSet pp = IndexSet::natural_pairs();
    CHECK(pp.at(1) == Index{1, 1});
    CHECK(pp.at(2) == Index{1, 2});
    CHECK(pp.at(3) == Index{2, 1});
    CHECK(pp.at(4) == Index{1, 3});
    CHECK(pp.at(5) == Index{2, 2});
    CHECK(pp.at(6) == Index{3, 1});
    for (std::uint64_t r = 1; r <= 5000; ++r) CHECK(pp.rank(pp.at(r)) == r);
  }

  SUBCASE("finite bounds") {
    IndexSet f = IndexSet::finite(64);
    CHECK(f.count() == 64);
    CHECK(f.scan_count(10000) == 64);
    CHECK(f.scan_count(10) == 10);
    CHECK_THROWS_AS(f.at(65), ConfigError);
    CHECK_THROWS_AS(IndexSet::finite(0), ConfigError);
    CHECK_THROWS_AS(f.at(0), ConfigError);
  }

  SUBCASE("kind names round-trip") {
    CHECK(IndexSet::from_kind_name("naturals", std::nullopt) == IndexSet::naturals());
    CHECK(IndexSet::from_kind_name("finite", 5) == IndexSet::finite(5));
    CHECK_THROWS_AS(IndexSet::from_kind_name("finite", std::nullopt), ConfigError);
    CHECK_THROWS_AS(IndexSet::from_kind_name("grid", std::nullopt), ConfigError);
  }
}

TEST_CASE("parser: precedence and associativity") {
  CHECK(eval_at("2+3*4^2", 1) == doctest::Approx(50.0).epsilon(1e-15));
  CHECK(eval_at("2^3^2", 1) == doctest::Approx(512.0).epsilon(1e-12));  // right-assoc
  CHECK(eval_at("(2^3)^2", 1) == doctest::Approx(64.0).epsilon(1e-13));
  CHECK(eval_at("2*i+1", 5) == doctest::Approx(11.0).epsilon(1e-15));
  CHECK(eval_at("min(i, 3) + max(i, 3)", 7) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(eval_at("log(exp(i))", 4) == doctest::Approx(4.0).epsilon(1e-14));

  // Unary minus binds looser than ^: -2^2 = -(2^2).
  Bindings b;
  auto s = parse("0-2^2")->eval_signed(b);
  CHECK(s.sign == -1);
  CHECK(s.real() == doctest::Approx(-4.0).epsilon(1e-14));

  SUBCASE("piecewise on index predicates") {
    CHECK(eval_at("i if i <= 3 else 0", 2) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(eval_at("i if i <= 3 else 0", 5) == 0.0);
    CHECK(eval_at("1 if i == 4 else 2", 4) == doctest::Approx(1.0));
    CHECK(eval_at("1 if i != 4 else 2", 4) == doctest::Approx(2.0));
    CHECK(eval_at("i if i >= j else j", 2, 7) == doctest::Approx(7.0));
  }

  SUBCASE("the pair-family formula evaluates to its hand value") {
    // 2^((k*j)^i) * (i+j)^k at i=1, j=2, k=2: 2^4 * 9 = 144.
    CHECK(eval_at("2^((k*j)^i) * (i+j)^k", 1, 2, 2) ==
          doctest::Approx(144.0).epsilon(1e-13));
  }

  SUBCASE("syntax errors carry positions") {
    CHECK_THROWS_AS(parse("2+*3"), dsl::ParseError);
    CHECK_THROWS_AS(parse(""), dsl::ParseError);
    CHECK_THROWS_AS(parse("foo(i)"), dsl::ParseError);
    CHECK_THROWS_AS(parse("(i"), dsl::ParseError);
    CHECK_THROWS_AS(parse("i +"), dsl::ParseError);
    try {
      parse("2+*3");
    } catch (const dsl::ParseError& e) {
      CHECK(e.position == 2);
    }
  }

  SUBCASE("domain errors") {
    Bindings at1;
    at1.i = 1.0L;
    CHECK_THROWS_AS(parse("log(0-i)")->eval(at1), dsl::EvalError);
    CHECK_THROWS_AS(parse("0-i")->eval(at1), dsl::EvalError);  // eval() wants >= 0
    CHECK_THROWS_AS(parse("(0-i)^0.5")->eval_signed(at1), dsl::EvalError);
    CHECK_THROWS_AS(parse("i")->eval(Bindings{}), dsl::EvalError);  // unbound variable
  }
}

TEST_CASE("structural helpers") {
  SUBCASE("structural equality and substitution") {
    CHECK(dsl::structurally_equal(parse("i^k"), parse("i ^ k")));
    CHECK_FALSE(dsl::structurally_equal(parse("i^k"), parse("k^i")));
    auto sub = dsl::substitute(parse("i^k"), Var::k, Expr::num(2.0L));
    CHECK(dsl::structurally_equal(sub, parse("i^2")));
    CHECK_FALSE(sub->contains(Var::k));
    CHECK(sub->contains(Var::i));
  }

  SUBCASE("linear forms") {
    auto lf = dsl::linear_form(parse("3+2*i"), Var::i);
    REQUIRE(lf.has_value());
    CHECK(lf->first == doctest::Approx(3.0));
    CHECK(lf->second == doctest::Approx(2.0));
    lf = dsl::linear_form(parse("i*2+3"), Var::i);
    REQUIRE(lf.has_value());
    CHECK(lf->second == doctest::Approx(2.0));
    lf = dsl::linear_form(parse("i"), Var::i);
    REQUIRE(lf.has_value());
    CHECK(lf->first == 0.0L);
    CHECK(lf->second == 1.0L);
    CHECK_FALSE(dsl::linear_form(parse("i^2"), Var::i).has_value());
    CHECK_FALSE(dsl::linear_form(parse("i*j"), Var::i).has_value());
  }

  SUBCASE("constant folding") {
    CHECK(*dsl::constant_value(parse("3*4+1")) == doctest::Approx(13.0).epsilon(1e-15));
    CHECK(dsl::constant_value(parse("2^10")) == doctest::Approx(1024.0));
    CHECK_FALSE(dsl::constant_value(parse("i")).has_value());
  }

  SUBCASE("weight validation") {
    IndexSet nat = IndexSet::naturals();
    CHECK_NOTHROW(dsl::validate_weight_expr(parse("i^k"), nat, true));
    CHECK_THROWS_AS(dsl::validate_weight_expr(parse("i^k"), nat, false), ConfigError);
    CHECK_THROWS_AS(dsl::validate_weight_expr(parse("j"), nat, true), ConfigError);
    CHECK_THROWS_AS(dsl::validate_weight_expr(parse("i-10"), nat, true), ConfigError);
    CHECK_NOTHROW(dsl::validate_weight_expr(parse("(i+j)^k"),
                                            IndexSet::natural_pairs(), true));
  }

  SUBCASE("rendered text reparses to the same tree") {
    const char* samples[] = {"i^k", "2^((k*j)^i)*(i+j)^k", "min(i,3)+max(j,k)",
                             "i if i <= 3 else j+1", "log(i+1)*exp(k)"};
    for (const char* s : samples) {
      auto e = parse(s);
      CHECK(dsl::structurally_equal(e, parse(e->str())));
    }
  }
}

TEST_CASE("canonicalizer") {
  SUBCASE("proportionality ignores factor order") {
    auto c = canon::proportional(parse("3 * i^k"), parse("i^k"));
    REQUIRE(c.has_value());
    CHECK(*c == doctest::Approx(3.0));
    c = canon::proportional(parse("2^i * i"), parse("i * 2^i"));
    REQUIRE(c.has_value());
    CHECK(*c == doctest::Approx(1.0));
    CHECK_FALSE(canon::proportional(parse("i^2"), parse("i")).has_value());
  }

  SUBCASE("ratios cancel shared factors") {
    canon::Product r = canon::ratio(parse("i^k"), parse("i^k"));
    CHECK(r.ok);
    CHECK(r.factors.empty());
    CHECK(r.log_const == 0.0L);
    CHECK(r.index_free());
    CHECK(r.level_free());

    r = canon::ratio(parse("i^(k+2)"), parse("i^k"));
    CHECK(r.ok);
    // Remaining factor is i^2: evaluating the rebuilt expression confirms.
    Bindings b;
    b.i = 5.0L;
    b.k = 3.0L;
    CHECK(r.to_expr()->eval(b).value() == doctest::Approx(25.0).epsilon(1e-13));
  }

  SUBCASE("affine-in-level decomposition") {
    auto a = canon::affine_in_k(parse("(i+1)*k + i"));
    REQUIRE(a.has_value());
    REQUIRE(a->slope != nullptr);
    Bindings b;
    b.i = 3.0L;
    CHECK(a->constant->eval(b).value() == doctest::Approx(3.0));
    CHECK(a->slope->eval(b).value() == doctest::Approx(4.0));
    auto free = canon::affine_in_k(parse("i^2"));
    REQUIRE(free.has_value());
    CHECK(free->slope == nullptr);
    CHECK_FALSE(canon::affine_in_k(parse("2^k")).has_value());
  }

  SUBCASE("sign analysis over i,j,k >= 1") {
    CHECK(canon::structurally_nonneg(parse("i+k")));
    CHECK(canon::structurally_ge_one(parse("i*k")));
    CHECK_FALSE(canon::structurally_nonneg(parse("0-i")));
    CHECK(canon::structurally_nonpos(parse("0-(i+j)")));
  }

  SUBCASE("randomized: factorize respects evaluation") {
    std::mt19937_64 rng(20240817);
    const char* pool[] = {"i^k", "2^i", "(i+1)^2", "exp(k)", "i*j", "3"};
    std::uniform_int_distribution<int> pick(0, 5);
    for (int t = 0; t < 200; ++t) {
      std::string text = std::string(pool[pick(rng)]) + "*" + pool[pick(rng)] + "/(" +
                         pool[pick(rng)] + ")";
      auto e = parse(text);
      canon::Product p = canon::factorize(e);
      if (!p.ok) continue;
      Bindings b;
      b.i = 2.0L;
      b.j = 3.0L;
      b.k = 2.0L;
      long double direct = e->eval(b).value();
      long double rebuilt = p.to_expr()->eval(b).value();
      CHECK(rebuilt == doctest::Approx(static_cast<double>(direct)).epsilon(1e-10));
    }
  }
}
