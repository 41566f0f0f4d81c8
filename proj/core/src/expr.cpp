#include "koethe/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace koethe::dsl {

namespace {
constexpr long double kInf = std::numeric_limits<long double>::infinity();
}

Signed Signed::of(long double x) {
  if (std::isnan(x)) throw EvalError("NaN produced during evaluation");
  if (x == 0.0L) return zero();
  Signed s;
  s.sign = x > 0.0L ? +1 : -1;
  s.log_abs = std::log(std::fabs(x));
  return s;
}

long double Signed::real() const {
  if (sign == 0) return 0.0L;
  long double m = std::exp(log_abs);  // may saturate to +inf
  return sign > 0 ? m : -m;
}

namespace {

Signed normalized(int sign, long double log_abs) {
  if (sign == 0 || log_abs == -kInf) return Signed::zero();
  return Signed{sign, log_abs};
}

// -1/0/+1 ordering of signed log-domain scalars.
int compare(const Signed& a, const Signed& b) {
  if (a.sign != b.sign) return a.sign < b.sign ? -1 : +1;
  if (a.sign == 0) return 0;
  if (a.log_abs == b.log_abs) return 0;
  bool abs_less = a.log_abs < b.log_abs;
  if (a.sign > 0) return abs_less ? -1 : +1;
  return abs_less ? +1 : -1;
}

Signed add(const Signed& a, const Signed& b) {
  if (a.sign == 0) return b;
  if (b.sign == 0) return a;
  if (a.sign == b.sign) {
    long double hi = a.log_abs, lo = b.log_abs;
    if (hi < lo) std::swap(hi, lo);
    if (hi == kInf) return normalized(a.sign, kInf);
    return normalized(a.sign, hi + std::log1p(std::exp(lo - hi)));
  }
  // Opposite signs: cancellation through log1p(-exp(.)).
  if (a.log_abs == b.log_abs) return Signed::zero();
  const Signed& big = a.log_abs > b.log_abs ? a : b;
  const Signed& small = a.log_abs > b.log_abs ? b : a;
  if (big.log_abs == kInf) return normalized(big.sign, kInf);
  long double diff = std::exp(small.log_abs - big.log_abs);  // in (0,1)
  return normalized(big.sign, big.log_abs + std::log1p(-diff));
}

Signed mul(const Signed& a, const Signed& b) {
  if (a.sign == 0 || b.sign == 0) return Signed::zero();
  return normalized(a.sign * b.sign, a.log_abs + b.log_abs);
}

Signed div(const Signed& a, const Signed& b) {
  if (b.sign == 0) {
    // x/0 = +inf convention (0/0 included); sign carried for x < 0.
    return normalized(a.sign == 0 ? +1 : a.sign, kInf);
  }
  if (a.sign == 0) return Signed::zero();
  if (b.log_abs == kInf) return a.log_abs == kInf ? normalized(a.sign * b.sign, kInf) : Signed::zero();
  return normalized(a.sign * b.sign, a.log_abs - b.log_abs);
}

Signed power(const Signed& a, const Signed& b) {
  long double t = b.real();
  if (a.sign == 0) {
    if (t > 0.0L) return Signed::zero();
    if (t == 0.0L) return Signed::positive(0.0L);  // 0^0 = 1
    return normalized(+1, kInf);                   // 0^t = 1/0 = +inf for t < 0
  }
  if (a.sign < 0) {
    if (std::rint(t) != t || std::fabs(t) >= 9.0e18L)
      throw EvalError("negative base under a non-integer power");
    long long n = static_cast<long long>(t);
    int sign = (n % 2 == 0) ? +1 : -1;
    return normalized(sign, a.log_abs * t);
  }
  if (a.log_abs == 0.0L) return Signed::positive(0.0L);  // 1^t = 1, also for t = +-inf
  return normalized(+1, a.log_abs * t);
}

bool predicate(Cmp c, const Signed& a, const Signed& b) {
  int r = compare(a, b);
  switch (c) {
    case Cmp::lt: return r < 0;
    case Cmp::le: return r <= 0;
    case Cmp::gt: return r > 0;
    case Cmp::ge: return r >= 0;
    case Cmp::eq: return r == 0;
    case Cmp::ne: return r != 0;
  }
  return false;
}

const char* cmp_text(Cmp c) {
  switch (c) {
    case Cmp::lt: return "<";
    case Cmp::le: return "<=";
    case Cmp::gt: return ">";
    case Cmp::ge: return ">=";
    case Cmp::eq: return "==";
    case Cmp::ne: return "!=";
  }
  return "?";
}

}  // namespace

ExprPtr Expr::num(long double x) {
  auto e = std::make_shared<Expr>();
  e->op = Op::number;
  e->number = x;
  return e;
}

ExprPtr Expr::variable(Var v) {
  auto e = std::make_shared<Expr>();
  e->op = Op::var;
  e->var = v;
  return e;
}

ExprPtr Expr::node(Op o, std::vector<ExprPtr> kids) {
  auto e = std::make_shared<Expr>();
  e->op = o;
  e->kids = std::move(kids);
  return e;
}

ExprPtr Expr::piecewise(Cmp c, ExprPtr lhs, ExprPtr rhs, ExprPtr then_e, ExprPtr else_e) {
  auto e = std::make_shared<Expr>();
  e->op = Op::piecewise;
  e->cmp = c;
  e->kids = {std::move(lhs), std::move(rhs), std::move(then_e), std::move(else_e)};
  return e;
}

Signed Expr::eval_signed(const Bindings& b) const {
  switch (op) {
    case Op::number: return Signed::of(number);
    case Op::var: {
      const std::optional<long double>* slot = nullptr;
      switch (var) {
        case Var::i: slot = &b.i; break;
        case Var::j: slot = &b.j; break;
        case Var::k: slot = &b.k; break;
      }
      if (!*slot) throw EvalError("unbound variable in expression");
      return Signed::of(**slot);
    }
    case Op::add: return add(kids[0]->eval_signed(b), kids[1]->eval_signed(b));
    case Op::sub: {
      Signed rhs = kids[1]->eval_signed(b);
      rhs.sign = -rhs.sign;
      return add(kids[0]->eval_signed(b), rhs);
    }
    case Op::mul: return mul(kids[0]->eval_signed(b), kids[1]->eval_signed(b));
    case Op::div: return div(kids[0]->eval_signed(b), kids[1]->eval_signed(b));
    case Op::pow: return power(kids[0]->eval_signed(b), kids[1]->eval_signed(b));
    case Op::log: {
      Signed a = kids[0]->eval_signed(b);
      if (a.sign <= 0) throw EvalError("log of a nonpositive value");
      return Signed::of(a.log_abs);  // the stored log IS the result
    }
    case Op::exp: {
      long double v = kids[0]->eval_signed(b).real();
      return normalized(+1, v);
    }
    case Op::min: {
      Signed a = kids[0]->eval_signed(b), c = kids[1]->eval_signed(b);
      return compare(a, c) <= 0 ? a : c;
    }
    case Op::max: {
      Signed a = kids[0]->eval_signed(b), c = kids[1]->eval_signed(b);
      return compare(a, c) >= 0 ? a : c;
    }
    case Op::piecewise: {
      bool cond = predicate(cmp, kids[0]->eval_signed(b), kids[1]->eval_signed(b));
      return (cond ? kids[2] : kids[3])->eval_signed(b);
    }
  }
  throw InternalError("unreachable expression op");
}

LogValue Expr::eval(const Bindings& b) const {
  Signed s = eval_signed(b);
  if (s.is_negative()) throw EvalError("weight expression evaluated to a negative value");
  if (s.sign == 0) return LogValue::zero();
  return LogValue::from_log(s.log_abs);
}

bool Expr::contains(Var v) const {
  if (op == Op::var) return var == v;
  for (const auto& kid : kids)
    if (kid->contains(v)) return true;
  return false;
}

void Expr::render(std::string& out) const {
  char buf[64];
  switch (op) {
    case Op::number:
      std::snprintf(buf, sizeof buf, "%.21Lg", number);
      out += buf;
      return;
    case Op::var:
      out += (var == Var::i ? 'i' : var == Var::j ? 'j' : 'k');
      return;
    case Op::add: case Op::sub: case Op::mul: case Op::div: case Op::pow: {
      const char* sym = op == Op::add ? " + " : op == Op::sub ? " - "
                      : op == Op::mul ? " * " : op == Op::div ? " / " : "^";
      out += '(';
      kids[0]->render(out);
      out += sym;
      kids[1]->render(out);
      out += ')';
      return;
    }
    case Op::log: case Op::exp:
      out += (op == Op::log ? "log(" : "exp(");
      kids[0]->render(out);
      out += ')';
      return;
    case Op::min: case Op::max:
      out += (op == Op::min ? "min(" : "max(");
      kids[0]->render(out);
      out += ", ";
      kids[1]->render(out);
      out += ')';
      return;
    case Op::piecewise:
      out += '(';
      kids[2]->render(out);
      out += " if ";
      kids[0]->render(out);
      out += ' ';
      out += cmp_text(cmp);
      out += ' ';
      kids[1]->render(out);
      out += " else ";
      kids[3]->render(out);
      out += ')';
      return;
  }
}

std::string Expr::str() const {
  std::string out;
  render(out);
  return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Token {
  enum Type { number, ident, sym, end } type = end;
  long double value = 0.0L;
  std::string text;
  std::size_t pos = 0;
};

class Lexer {
public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    tok_ = Token{};
    tok_.pos = pos_;
    if (pos_ >= src_.size()) {
      tok_.type = Token::end;
      return;
    }
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = src_.c_str() + pos_;
      char* after = nullptr;
      tok_.value = std::strtold(begin, &after);
      if (after == begin) throw ParseError(pos_, "bad number");
      tok_.type = Token::number;
      pos_ += static_cast<std::size_t>(after - begin);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      tok_.type = Token::ident;
      tok_.text = src_.substr(start, pos_ - start);
      return;
    }
    static const char* two_char[] = {"<=", ">=", "==", "!="};
    for (const char* s : two_char) {
      if (src_.compare(pos_, 2, s) == 0) {
        tok_.type = Token::sym;
        tok_.text = s;
        pos_ += 2;
        return;
      }
    }
    if (std::string("+-*/^(),<>").find(c) != std::string::npos) {
      tok_.type = Token::sym;
      tok_.text = std::string(1, c);
      ++pos_;
      return;
    }
    throw ParseError(pos_, std::string("unexpected character '") + c + "'");
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  Token tok_;
};

class Parser {
public:
  explicit Parser(const std::string& src) : lex_(src) {}

  ExprPtr run() {
    ExprPtr e = expr();
    if (lex_.peek().type != Token::end)
      throw ParseError(lex_.peek().pos, "trailing input after expression");
    return e;
  }

private:
  bool at_sym(const char* s) const {
    return lex_.peek().type == Token::sym && lex_.peek().text == s;
  }
  bool at_ident(const char* s) const {
    return lex_.peek().type == Token::ident && lex_.peek().text == s;
  }
  void expect_sym(const char* s) {
    if (!at_sym(s)) throw ParseError(lex_.peek().pos, std::string("expected '") + s + "'");
    lex_.take();
  }

  ExprPtr expr() {
    ExprPtr value = sum();
    if (!at_ident("if")) return value;
    lex_.take();
    ExprPtr lhs = sum();
    Cmp c = comparison();
    ExprPtr rhs = sum();
    if (!at_ident("else"))
      throw ParseError(lex_.peek().pos, "piecewise clause needs 'else'");
    lex_.take();
    ExprPtr other = expr();
    return Expr::piecewise(c, lhs, rhs, value, other);
  }

  Cmp comparison() {
    if (lex_.peek().type != Token::sym)
      throw ParseError(lex_.peek().pos, "expected a comparison operator");
    std::string t = lex_.take().text;
    if (t == "<") return Cmp::lt;
    if (t == "<=") return Cmp::le;
    if (t == ">") return Cmp::gt;
    if (t == ">=") return Cmp::ge;
    if (t == "==") return Cmp::eq;
    if (t == "!=") return Cmp::ne;
    throw ParseError(lex_.peek().pos, "expected a comparison operator");
  }

  ExprPtr sum() {
    ExprPtr e = product();
    while (at_sym("+") || at_sym("-")) {
      Op o = lex_.take().text == "+" ? Op::add : Op::sub;
      e = Expr::node(o, {e, product()});
    }
    return e;
  }

  ExprPtr product() {
    ExprPtr e = unary();
    while (at_sym("*") || at_sym("/")) {
      Op o = lex_.take().text == "*" ? Op::mul : Op::div;
      e = Expr::node(o, {e, unary()});
    }
    return e;
  }

  ExprPtr unary() {
    if (at_sym("-")) {
      std::size_t pos = lex_.take().pos;
      (void)pos;
      return Expr::node(Op::sub, {Expr::num(0.0L), power()});
    }
    return power();
  }

  ExprPtr power() {
    ExprPtr base = atom();
    if (!at_sym("^")) return base;
    lex_.take();
    return Expr::node(Op::pow, {base, unary()});
  }

  ExprPtr atom() {
    const Token& t = lex_.peek();
    if (t.type == Token::number) return Expr::num(lex_.take().value);
    if (t.type == Token::sym && t.text == "(") {
      lex_.take();
      ExprPtr e = expr();
      expect_sym(")");
      return e;
    }
    if (t.type == Token::ident) {
      std::string name = lex_.take().text;
      if (name == "i") return Expr::variable(Var::i);
      if (name == "j") return Expr::variable(Var::j);
      if (name == "k") return Expr::variable(Var::k);
      if (name == "log" || name == "exp") {
        expect_sym("(");
        ExprPtr a = expr();
        expect_sym(")");
        return Expr::node(name == "log" ? Op::log : Op::exp, {a});
      }
      if (name == "min" || name == "max") {
        expect_sym("(");
        ExprPtr a = expr();
        expect_sym(",");
        ExprPtr b = expr();
        expect_sym(")");
        return Expr::node(name == "min" ? Op::min : Op::max, {a, b});
      }
      throw ParseError(t.pos, "unknown identifier '" + name + "'");
    }
    throw ParseError(t.pos, "expected a value");
  }

  Lexer lex_;
};

}  // namespace

ExprPtr parse(const std::string& text) { return Parser(text).run(); }

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b || a->op != b->op) return false;
  switch (a->op) {
    case Op::number: return a->number == b->number;
    case Op::var: return a->var == b->var;
    case Op::piecewise:
      if (a->cmp != b->cmp) return false;
      break;
    default: break;
  }
  if (a->kids.size() != b->kids.size()) return false;
  for (std::size_t n = 0; n < a->kids.size(); ++n)
    if (!structurally_equal(a->kids[n], b->kids[n])) return false;
  return true;
}

ExprPtr substitute(const ExprPtr& e, Var v, const ExprPtr& replacement) {
  if (e->op == Op::var) return e->var == v ? replacement : e;
  if (e->kids.empty()) return e;
  bool changed = false;
  std::vector<ExprPtr> kids;
  kids.reserve(e->kids.size());
  for (const auto& kid : e->kids) {
    kids.push_back(substitute(kid, v, replacement));
    changed = changed || kids.back().get() != kid.get();
  }
  if (!changed) return e;
  auto out = std::make_shared<Expr>(*e);
  out->kids = std::move(kids);
  return out;
}

std::optional<long double> constant_value(const ExprPtr& e) {
  if (e->contains(Var::i) || e->contains(Var::j) || e->contains(Var::k)) return std::nullopt;
  try {
    return e->eval_signed(Bindings{}).real();
  } catch (const EvalError&) {
    return std::nullopt;
  }
}

std::optional<std::pair<long double, long double>> linear_form(const ExprPtr& e, Var v) {
  using Pair = std::pair<long double, long double>;
  switch (e->op) {
    case Op::number: return Pair{e->number, 0.0L};
    case Op::var:
      if (e->var == v) return Pair{0.0L, 1.0L};
      return std::nullopt;
    case Op::add: case Op::sub: {
      auto a = linear_form(e->kids[0], v), b = linear_form(e->kids[1], v);
      if (!a || !b) return std::nullopt;
      long double s = e->op == Op::add ? 1.0L : -1.0L;
      return Pair{a->first + s * b->first, a->second + s * b->second};
    }
    case Op::mul: {
      if (auto c = constant_value(e->kids[0])) {
        auto b = linear_form(e->kids[1], v);
        if (!b) return std::nullopt;
        return Pair{*c * b->first, *c * b->second};
      }
      if (auto c = constant_value(e->kids[1])) {
        auto a = linear_form(e->kids[0], v);
        if (!a) return std::nullopt;
        return Pair{*c * a->first, *c * a->second};
      }
      return std::nullopt;
    }
    case Op::div: {
      auto c = constant_value(e->kids[1]);
      if (!c || *c == 0.0L) return std::nullopt;
      auto a = linear_form(e->kids[0], v);
      if (!a) return std::nullopt;
      return Pair{a->first / *c, a->second / *c};
    }
    default: {
      auto c = constant_value(e);
      if (c) return Pair{*c, 0.0L};
      return std::nullopt;
    }
  }
}

void validate_weight_expr(const ExprPtr& e, const IndexSet& idx, bool allow_level_var) {
  if (e->contains(Var::j) && idx.kind() != IndexSet::Kind::natural_pairs)
    throw ConfigError("variable j is only available on a pair index set");
  if (e->contains(Var::k) && !allow_level_var)
    throw ConfigError("variable k is not available in this expression");

  std::vector<std::uint64_t> ranks;
  for (std::uint64_t r = 1; r <= idx.scan_count(48); ++r) ranks.push_back(r);
  for (std::uint64_t r : {std::uint64_t{100}, std::uint64_t{1000}, std::uint64_t{9999}})
    if (!idx.count() || r <= *idx.count()) ranks.push_back(r);

  std::vector<long double> levels = allow_level_var
      ? std::vector<long double>{1.0L, 2.0L, 3.0L, 5.0L, 8.0L}
      : std::vector<long double>{0.0L};
  for (long double k : levels) {
    for (std::uint64_t r : ranks) {
      Index ix = idx.at(r);
      Bindings b;
      b.i = static_cast<long double>(ix.i);
      if (ix.is_pair()) b.j = static_cast<long double>(ix.j);
      if (allow_level_var) b.k = k;
      Signed s;
      try {
        s = e->eval_signed(b);
      } catch (const EvalError& err) {
        throw ConfigError(std::string("expression fails to evaluate: ") + err.what());
      }
      if (s.is_negative())
        throw ConfigError("expression is negative at i=" + std::to_string(ix.i) +
                          (ix.is_pair() ? ", j=" + std::to_string(ix.j) : std::string()) +
                          (allow_level_var ? ", k=" + std::to_string(static_cast<long>(k)) : std::string()));
    }
  }
}

}  // namespace koethe::dsl
