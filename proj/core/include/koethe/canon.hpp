#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "koethe/expr.hpp"

namespace koethe::canon {

// Multiplicative normal form: log_const + product of base^exponent
// factors, with structurally equal bases merged by adding exponents and
// exp(x) recorded as a factor with a null base (meaning base e).
struct Factor {
  dsl::ExprPtr base;      // null => natural base e
  dsl::ExprPtr exponent;  // simplified sum; never a plain zero
};

struct Product {
  long double log_const = 0.0L;
  std::vector<Factor> factors;
  bool ok = true;  // false when a nonpositive constant broke the form

  bool index_free() const;                 // no factor mentions i or j
  bool level_free() const;                 // no factor mentions k
  dsl::ExprPtr to_expr() const;            // rebuild an expression
};

// Flattens mul/div/pow-with-shared-base/exp into a Product.  Nodes the
// flattener cannot split (add, sub, log, min, max, piecewise) become
// atomic bases.  Exponents are simplified with numeric folding.
Product factorize(const dsl::ExprPtr& e);

// Canonical ratio a/b: factorize both, merge, drop zero exponents.
Product ratio(const dsl::ExprPtr& a, const dsl::ExprPtr& b);

// Decomposes e == A + B*k with A, B free of k (they may mention i, j).
// Returns nothing when e is not affine in k under the recognized
// operations (+, -, * by k-free, / by k-free).
struct AffineInK {
  dsl::ExprPtr constant;  // A
  dsl::ExprPtr slope;     // B; null when e is k-free
};
std::optional<AffineInK> affine_in_k(const dsl::ExprPtr& e);

// a == c * b structurally (same factor multiset); returns c.
std::optional<long double> proportional(const dsl::ExprPtr& a, const dsl::ExprPtr& b);

// Sound syntactic sign analysis over the domain i,j,k >= 1.
bool structurally_nonneg(const dsl::ExprPtr& e);
bool structurally_ge_one(const dsl::ExprPtr& e);
// e <= 0 over the domain; recognizes negated nonneg combinations.
bool structurally_nonpos(const dsl::ExprPtr& e);

// Simplified n-ary sum with numeric folding; empty -> 0.
dsl::ExprPtr make_sum(std::vector<dsl::ExprPtr> terms);

}  // namespace koethe::canon
