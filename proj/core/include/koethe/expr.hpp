#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "koethe/errors.hpp"
#include "koethe/index_set.hpp"
#include "koethe/log_value.hpp"

namespace koethe::dsl {

// Thrown for syntax errors; position is a 0-based offset into the source.
class ParseError : public ConfigError {
public:
  ParseError(std::size_t pos, const std::string& what)
      : ConfigError(what + " (at offset " + std::to_string(pos) + ")"), position(pos) {}
  std::size_t position;
};

// Thrown when evaluation leaves the nonnegative domain (log of a
// nonpositive value, negative base under a fractional power, ...).
class EvalError : public ConfigError {
public:
  explicit EvalError(const std::string& what) : ConfigError(what) {}
};

// Signed scalar in log magnitude, the working type of the evaluator.
// Weights themselves are nonnegative, but subtrees like `0 - i` pass
// through signed territory before the final sign check.
struct Signed {
  int sign = 0;            // -1, 0, +1
  long double log_abs = 0; // log |x|, meaningful when sign != 0; +inf allowed

  static Signed zero() { return Signed{0, 0.0L}; }
  static Signed positive(long double log_abs) { return Signed{+1, log_abs}; }
  static Signed of(long double x);
  long double real() const;  // saturates to +-inf
  bool is_negative() const { return sign < 0; }
};

struct Bindings {
  std::optional<long double> i, j, k;
};

enum class Op { number, var, add, sub, mul, div, pow, log, exp, min, max, piecewise };
enum class Var { i, j, k };
enum class Cmp { lt, le, gt, ge, eq, ne };

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

class Expr {
public:
  Op op;
  long double number = 0.0L;       // op == number
  Var var = Var::i;                // op == var
  Cmp cmp = Cmp::le;               // op == piecewise
  // add/sub/mul/div/pow/min/max: kids[0], kids[1]; log/exp: kids[0];
  // piecewise: kids[0] cmp kids[1] ? kids[2] : kids[3]
  std::vector<ExprPtr> kids;

  static ExprPtr num(long double x);
  static ExprPtr variable(Var v);
  static ExprPtr node(Op o, std::vector<ExprPtr> kids);
  static ExprPtr piecewise(Cmp c, ExprPtr lhs, ExprPtr rhs, ExprPtr then_e, ExprPtr else_e);

  Signed eval_signed(const Bindings& b) const;
  // Evaluates and insists on a nonnegative result.
  LogValue eval(const Bindings& b) const;

  bool contains(Var v) const;
  std::string str() const;

private:
  void render(std::string& out) const;
};

// Grammar (whitespace-insensitive):
//   expr    := sum ('if' pred 'else' expr)?
//   pred    := sum ('<' | '<=' | '>' | '>=' | '==' | '!=') sum
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-'? power
//   power   := atom ('^' unary)?          (right-associative)
//   atom    := NUMBER | 'i' | 'j' | 'k'
//            | ('log' | 'exp') '(' expr ')'
//            | ('min' | 'max') '(' expr ',' expr ')'
//            | '(' expr ')'
ExprPtr parse(const std::string& text);

bool structurally_equal(const ExprPtr& a, const ExprPtr& b);
ExprPtr substitute(const ExprPtr& e, Var v, const ExprPtr& replacement);

// Recognizes e == c0 + c1 * v with numeric c0, c1 and no other variables.
std::optional<std::pair<long double, long double>> linear_form(const ExprPtr& e, Var v);

// Folds an expression with no free variables down to a number.
std::optional<long double> constant_value(const ExprPtr& e);

// Rejects expressions that use variables outside the index set's scope or
// that evaluate negative (or error out) somewhere on a sampled grid of
// indices and levels.
void validate_weight_expr(const ExprPtr& e, const IndexSet& idx, bool allow_level_var);

}  // namespace koethe::dsl
