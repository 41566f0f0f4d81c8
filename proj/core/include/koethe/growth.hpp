#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "koethe/expr.hpp"
#include "koethe/log_value.hpp"

namespace koethe::growth {

// Asymptotic normal form of a positive closed-form expression in one
// variable v -> infinity:
//
//   C * v^a * (log v)^b * exp( sum_t e_t * v^(d_t) ),   d_t > 0 descending.
//
// `exact` records whether the constants are trustworthy or only the
// asymptotic class is (sums of unlike terms keep the dominant class and
// drop exactness).  Exponents (a, b, d_t, e_t) are always structural.
struct Monomial {
  bool exact = true;
  bool zero = false;
  long double log_coeff = 0.0L;
  long double pow = 0.0L;
  long double logpow = 0.0L;
  std::vector<std::pair<long double, long double>> expo;
};

// Normal-form extraction with every variable other than `v` bound to a
// positive constant.  Returns nothing when the expression falls outside
// the catalog (general sums, iterated logs, two-variable exponents, ...).
std::optional<Monomial> analyze(const dsl::ExprPtr& e, dsl::Var v, const dsl::Bindings& fixed);

Monomial divide(const Monomial& a, const Monomial& b);

enum class LimitKind { zero, positive, infinite };
struct Limit {
  LimitKind kind;
  long double log_value = 0.0L;  // for kind == positive
  bool exact = false;
  std::string rule;
};
Limit limit_at_infinity(const Monomial& m);

// Certified eventual monotonicity: beyond `from` the function does not
// increase (respectively decrease).  Only issued for exact monomials
// whose derivative sign provably settles.
struct Monotone {
  long double from;
  std::string rule;
};
std::optional<Monotone> eventually_decreasing(const Monomial& m);
std::optional<Monotone> eventually_increasing(const Monomial& m);

// At most one rise-then-fall sign change of the derivative; what makes a
// bounded peak search legitimate.
bool certified_unimodal(const Monomial& m);

enum class SeriesKind { converges, diverges, unknown };
struct Series {
  SeriesKind kind;
  std::string rule;
};
// Convergence of sum_{v >= v0} t(v) for a monomial-shaped positive term.
// Sound for inexact monomials: only the class enters.
Series series(const Monomial& m);

using TermFn = std::function<LogValue(std::uint64_t)>;

// Upper bound for sum_{v > N} t(v), evaluated against the true term
// function.  Catalog: exact zero tails, geometric / superexponential
// ratio bounds, p-series integral bounds.  Nothing outside the catalog.
std::optional<LogValue> tail_sum_bound(const Monomial& m, const TermFn& t,
                                       std::uint64_t N, std::string* rule);

// Upper bound for sup_{v > N} t(v): monotone tails directly, otherwise a
// certified peak search between N and the monotonicity threshold.
std::optional<LogValue> tail_sup_bound(const Monomial& m, const TermFn& t,
                                       std::uint64_t N, std::string* rule);

// Sufficient structural check that the exponential-in-v part of an
// expression does not involve the level variable k: every pow/exp subtree
// whose exponent mentions v is itself k-free.  Lets per-level
// exponential-decay verdicts extend to all levels at once.
bool exp_part_level_free(const dsl::ExprPtr& e);

}  // namespace koethe::growth
