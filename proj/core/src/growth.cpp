#include "koethe/growth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "koethe/errors.hpp"

namespace koethe::growth {
namespace {

using dsl::Expr;
using dsl::ExprPtr;
using dsl::Op;
using dsl::Var;

Monomial constant_monomial(long double log_c, bool exact = true) {
  Monomial m;
  m.log_coeff = log_c;
  m.exact = exact;
  return m;
}

Monomial zero_monomial() {
  Monomial m;
  m.zero = true;
  return m;
}

// log(e^a + e^b)
long double lse(long double a, long double b) {
  if (a < b) std::swap(a, b);
  if (std::isinf(a)) return a;
  return a + std::log1p(std::exp(b - a));
}

void push_expo(Monomial& m, long double d, long double e) {
  if (e == 0.0L) return;
  if (d == 0.0L) {
    m.log_coeff += e;  // constant term of the exponent folds into the coefficient
    return;
  }
  for (auto& [dd, ee] : m.expo) {
    if (dd == d) {
      ee += e;
      return;
    }
  }
  m.expo.emplace_back(d, e);
}

void normalize_expo(Monomial& m) {
  m.expo.erase(std::remove_if(m.expo.begin(), m.expo.end(),
                              [](const auto& p) { return p.second == 0.0L; }),
               m.expo.end());
  std::sort(m.expo.begin(), m.expo.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
}

Monomial merge_mul(const Monomial& a, const Monomial& b) {
  if (a.zero || b.zero) return zero_monomial();
  Monomial m;
  m.exact = a.exact && b.exact;
  m.log_coeff = a.log_coeff + b.log_coeff;
  m.pow = a.pow + b.pow;
  m.logpow = a.logpow + b.logpow;
  m.expo = a.expo;
  for (const auto& [d, e] : b.expo) push_expo(m, d, e);
  normalize_expo(m);
  return m;
}

Monomial invert(const Monomial& a) {
  Monomial m;
  m.exact = a.exact;
  m.log_coeff = -a.log_coeff;
  m.pow = -a.pow;
  m.logpow = -a.logpow;
  for (const auto& [d, e] : a.expo) m.expo.emplace_back(d, -e);
  return m;
}

// -1: a = o(b);  0: same asymptotic class;  +1: b = o(a)
int class_compare(const Monomial& a, const Monomial& b) {
  if (a.zero && b.zero) return 0;
  if (a.zero) return -1;
  if (b.zero) return 1;
  Monomial q = merge_mul(a, invert(b));
  if (!q.expo.empty()) return q.expo.front().second > 0.0L ? 1 : -1;
  if (q.pow != 0.0L) return q.pow > 0.0L ? 1 : -1;
  if (q.logpow != 0.0L) return q.logpow > 0.0L ? 1 : -1;
  return 0;
}

std::optional<Monomial> anf(const ExprPtr& e, Var v);

std::optional<Monomial> power_of(const Monomial& base, long double t) {
  if (base.zero) {
    if (t > 0.0L) return zero_monomial();
    if (t == 0.0L) return constant_monomial(0.0L);
    return std::nullopt;  // 0^negative
  }
  Monomial m;
  m.exact = base.exact;
  m.log_coeff = base.log_coeff * t;
  m.pow = base.pow * t;
  m.logpow = base.logpow * t;
  for (const auto& [d, e] : base.expo) m.expo.emplace_back(d, e * t);
  normalize_expo(m);
  return m;
}

// c^f(v) with log c given; also serves exp(f) via log c = 1.
std::optional<Monomial> const_pow_expr(long double log_c, const ExprPtr& f, Var v) {
  if (!f->contains(v)) {
    auto t = dsl::constant_value(f);
    if (!t) return std::nullopt;
    return constant_monomial(*t * log_c);
  }
  if (log_c == 0.0L) return constant_monomial(0.0L);
  if (auto lin = dsl::linear_form(f, v)) {
    Monomial m;
    m.log_coeff = lin->first * log_c;
    push_expo(m, 1.0L, lin->second * log_c);
    normalize_expo(m);
    return m;
  }
  auto fm = anf(f, v);
  if (!fm || !fm->exact || fm->zero || !fm->expo.empty()) return std::nullopt;
  long double alpha = std::exp(fm->log_coeff);
  if (!std::isfinite(alpha)) return std::nullopt;
  if (fm->logpow == 0.0L && fm->pow > 0.0L) {
    // c^(alpha * v^d) = exp(alpha*log(c) * v^d)
    Monomial m;
    push_expo(m, fm->pow, alpha * log_c);
    normalize_expo(m);
    return m;
  }
  if (fm->logpow == 1.0L && fm->pow == 0.0L) {
    // c^(alpha * log v) = v^(alpha * log c)
    Monomial m;
    m.pow = alpha * log_c;
    return m;
  }
  return std::nullopt;
}

std::optional<Monomial> log_of(const Monomial& a) {
  if (a.zero) return std::nullopt;
  if (!a.expo.empty()) {
    auto [d, e] = a.expo.front();
    if (e < 0.0L) return std::nullopt;  // value drops below 1, log goes negative
    Monomial m;
    m.log_coeff = std::log(e);
    m.pow = d;
    m.exact = a.exact && a.expo.size() == 1 && a.pow == 0.0L &&
              a.logpow == 0.0L && a.log_coeff == 0.0L;
    return m;
  }
  if (a.pow > 0.0L) {
    Monomial m;
    m.log_coeff = std::log(a.pow);
    m.logpow = 1.0L;
    m.exact = a.exact && a.logpow == 0.0L && a.log_coeff == 0.0L;
    return m;
  }
  if (a.pow == 0.0L && a.logpow == 0.0L && a.log_coeff > 0.0L) {
    return constant_monomial(std::log(a.log_coeff), a.exact);
  }
  return std::nullopt;  // iterated-log class or a nonpositive limit
}

bool same_shape(const Monomial& a, const Monomial& b) {
  return a.pow == b.pow && a.logpow == b.logpow && a.expo == b.expo;
}

std::optional<Monomial> anf(const ExprPtr& e, Var v) {
  switch (e->op) {
    case Op::number:
      if (e->number < 0.0L) return std::nullopt;
      if (e->number == 0.0L) return zero_monomial();
      return constant_monomial(std::log(e->number));
    case Op::var: {
      if (e->var != v) return std::nullopt;  // unbound foreign variable
      Monomial m;
      m.pow = 1.0L;
      return m;
    }
    case Op::add: {
      auto a = anf(e->kids[0], v);
      auto b = anf(e->kids[1], v);
      if (!a || !b) return std::nullopt;
      if (a->zero) return b;
      if (b->zero) return a;
      int c = class_compare(*a, *b);
      if (c == 0) {
        Monomial m = *a;
        m.log_coeff = lse(a->log_coeff, b->log_coeff);
        m.exact = a->exact && b->exact;
        return m;
      }
      Monomial m = (c > 0) ? *a : *b;
      m.exact = false;
      return m;
    }
    case Op::sub: {
      auto a = anf(e->kids[0], v);
      auto b = anf(e->kids[1], v);
      if (!a || !b) return std::nullopt;
      if (b->zero) return a;
      if (a->zero) return std::nullopt;
      if (class_compare(*a, *b) <= 0) return std::nullopt;  // cancellation territory
      Monomial m = *a;
      m.exact = false;
      return m;
    }
    case Op::mul: {
      auto a = anf(e->kids[0], v);
      auto b = anf(e->kids[1], v);
      if (!a || !b) return std::nullopt;
      return merge_mul(*a, *b);
    }
    case Op::div: {
      auto a = anf(e->kids[0], v);
      auto b = anf(e->kids[1], v);
      if (!a || !b || b->zero) return std::nullopt;
      if (a->zero) return zero_monomial();
      return merge_mul(*a, invert(*b));
    }
    case Op::pow: {
      const ExprPtr& base = e->kids[0];
      const ExprPtr& expnt = e->kids[1];
      if (expnt->contains(v)) {
        if (base->contains(v)) return std::nullopt;  // v^v territory
        auto c = dsl::constant_value(base);
        if (!c || *c <= 0.0L) return std::nullopt;
        return const_pow_expr(std::log(*c), expnt, v);
      }
      auto t = dsl::constant_value(expnt);
      if (!t) return std::nullopt;
      auto a = anf(base, v);
      if (!a) return std::nullopt;
      return power_of(*a, *t);
    }
    case Op::log: {
      auto a = anf(e->kids[0], v);
      if (!a) return std::nullopt;
      return log_of(*a);
    }
    case Op::exp:
      return const_pow_expr(1.0L, e->kids[0], v);
    case Op::min:
    case Op::max: {
      auto a = anf(e->kids[0], v);
      auto b = anf(e->kids[1], v);
      if (!a || !b) return std::nullopt;
      bool want_min = e->op == Op::min;
      if (a->zero || b->zero) {
        if (want_min) return zero_monomial();
        return a->zero ? b : a;
      }
      int c = class_compare(*a, *b);
      if (c != 0) {
        Monomial m = ((c < 0) == want_min) ? *a : *b;
        m.exact = false;  // the other branch rules the prefix
        return m;
      }
      Monomial m = *a;
      bool pick_a = (a->log_coeff <= b->log_coeff) == want_min;
      m.log_coeff = pick_a ? a->log_coeff : b->log_coeff;
      m.exact = a->exact && b->exact;
      return m;
    }
    case Op::piecewise: {
      if (dsl::structurally_equal(e->kids[2], e->kids[3])) return anf(e->kids[2], v);
      auto a = anf(e->kids[2], v);
      auto b = anf(e->kids[3], v);
      if (a && b && a->exact && b->exact && !a->zero && !b->zero &&
          same_shape(*a, *b) && a->log_coeff == b->log_coeff) {
        return a;  // both branches are pointwise the same function
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::optional<std::uint64_t> threshold_to_index(long double from) {
  if (!(from >= 0.0L) || from > 0x1p62) return std::nullopt;
  return static_cast<std::uint64_t>(std::ceil(from));
}

}  // namespace

std::optional<Monomial> analyze(const dsl::ExprPtr& e, dsl::Var v, const dsl::Bindings& fixed) {
  ExprPtr cur = e;
  struct Slot {
    Var var;
    const std::optional<long double>& value;
  };
  const Slot slots[] = {{Var::i, fixed.i}, {Var::j, fixed.j}, {Var::k, fixed.k}};
  for (const auto& s : slots) {
    if (s.var == v || !s.value) continue;
    cur = dsl::substitute(cur, s.var, Expr::num(*s.value));
  }
  return anf(cur, v);
}

Monomial divide(const Monomial& a, const Monomial& b) {
  if (b.zero) throw InternalError("growth::divide by the zero monomial");
  if (a.zero) return a;
  return merge_mul(a, invert(b));
}

Limit limit_at_infinity(const Monomial& m) {
  if (m.zero) return {LimitKind::zero, 0.0L, true, "zero"};
  if (!m.expo.empty()) {
    bool up = m.expo.front().second > 0.0L;
    return {up ? LimitKind::infinite : LimitKind::zero, 0.0L, true,
            up ? "exp-growth" : "exp-decay"};
  }
  if (m.pow != 0.0L) {
    bool up = m.pow > 0.0L;
    return {up ? LimitKind::infinite : LimitKind::zero, 0.0L, true,
            up ? "poly-growth" : "poly-decay"};
  }
  if (m.logpow != 0.0L) {
    bool up = m.logpow > 0.0L;
    return {up ? LimitKind::infinite : LimitKind::zero, 0.0L, true,
            up ? "log-growth" : "log-decay"};
  }
  return {LimitKind::positive, m.log_coeff, m.exact, "constant"};
}

std::optional<Monotone> eventually_decreasing(const Monomial& m) {
  if (m.zero) return Monotone{1.0L, "zero"};
  if (!m.exact) return std::nullopt;
  long double bplus = std::max(m.logpow, 0.0L);
  if (!m.expo.empty()) {
    // d/dv log t = a/v + b/(v log v) + sum e*d*v^(d-1); for v >= 3 the log
    // term is at most b+/v, and when every e < 0 the leading entry alone
    // already outweighs (a+b+)/v once v^d >= (a+b+)/(-e*d).
    for (const auto& [d, ecoef] : m.expo)
      if (ecoef > 0.0L) return std::nullopt;
    auto [d, ecoef] = m.expo.front();
    long double num = m.pow + bplus;
    long double from = 3.0L;
    if (num > 0.0L)
      from = std::max(from, std::pow(num / (-ecoef * d), 1.0L / d) + 1.0L);
    if (!std::isfinite(from)) return std::nullopt;
    return Monotone{from, "exp-decay-threshold"};
  }
  if (m.pow < 0.0L) {
    // a/v + b/(v log v) <= 0 once log v >= b+/(-a)
    long double from = 3.0L;
    if (m.logpow > 0.0L) {
      long double lf = m.logpow / (-m.pow);
      if (lf > 45.0L) return std::nullopt;  // threshold astronomically far out
      from = std::max(from, std::exp(lf) + 1.0L);
    }
    return Monotone{from, "poly-decay-threshold"};
  }
  if (m.pow == 0.0L) {
    if (m.logpow < 0.0L) return Monotone{3.0L, "log-decay"};
    if (m.logpow == 0.0L) return Monotone{1.0L, "constant"};
  }
  return std::nullopt;
}

std::optional<Monotone> eventually_increasing(const Monomial& m) {
  if (m.zero) return Monotone{1.0L, "zero"};
  return eventually_decreasing(invert(m));
}

bool certified_unimodal(const Monomial& m) {
  if (m.zero) return true;
  if (!m.exact) return false;
  if (m.expo.empty()) return true;  // sign(a + b/log v) crosses at most once
  // v * d/dv log t = a + b/log v + sum e*d*v^d: strictly decreasing when
  // every e < 0 and b >= 0, so the derivative changes sign at most once.
  if (m.logpow < 0.0L) return false;
  for (const auto& [d, ecoef] : m.expo)
    if (ecoef > 0.0L) return false;
  return true;
}

Series series(const Monomial& m) {
  if (m.zero) return {SeriesKind::converges, "zero-terms"};
  if (!m.expo.empty()) {
    return m.expo.front().second < 0.0L
               ? Series{SeriesKind::converges, "exponential-decay"}
               : Series{SeriesKind::diverges, "exponential-growth"};
  }
  if (m.pow < -1.0L) return {SeriesKind::converges, "p-series"};
  if (m.pow > -1.0L) return {SeriesKind::diverges, "p-series"};
  return m.logpow < -1.0L ? Series{SeriesKind::converges, "log-p-series"}
                          : Series{SeriesKind::diverges, "log-p-series"};
}

std::optional<LogValue> tail_sum_bound(const Monomial& m, const TermFn& t,
                                       std::uint64_t N, std::string* rule) {
  auto done = [&](LogValue v, const char* r) -> std::optional<LogValue> {
    if (rule) *rule = r;
    return v;
  };
  if (m.zero) return done(LogValue::zero(), "zero-tail");
  if (!m.exact || N == 0) return std::nullopt;

  if (!m.expo.empty()) {
    for (const auto& [d, ecoef] : m.expo)
      if (ecoef > 0.0L) return std::nullopt;
    auto [d, ecoef] = m.expo.front();
    if (d < 1.0L) return std::nullopt;  // ratio does not stay below a fixed rho
    // One-step ratio bound valid for every i > N: the polynomial factor
    // contributes at most exp(a+/(N+1)), the log factor exp(b+/((N+1)ln(N+1))),
    // and the leading exponential at most exp(e*d*(N+1)^(d-1)) since
    // (i+1)^d - i^d >= d*i^(d-1) for d >= 1.  Lower-order negative
    // exponentials only shrink the ratio further.
    long double n1 = static_cast<long double>(N) + 1.0L;
    long double log_rho = std::max(m.pow, 0.0L) / n1 +
                          std::max(m.logpow, 0.0L) / (n1 * std::log(n1)) +
                          ecoef * d * std::pow(n1, d - 1.0L);
    if (!(log_rho < 0.0L)) return std::nullopt;
    long double rho = std::exp(log_rho);
    if (!(rho < 1.0L)) return std::nullopt;
    LogValue first = t(N + 1);
    return done(LogValue::from_log(first.log() - std::log1p(-rho)), "geometric-ratio");
  }

  long double a = m.pow;
  long double b = m.logpow;
  if (a == -1.0L && b < -1.0L && N >= 2) {
    // sum_{i>N} C i^-1 (log i)^b <= C * (log N)^(b+1) / (-b-1)
    long double lb = m.log_coeff + (b + 1.0L) * std::log(std::log((long double)N)) -
                     std::log(-b - 1.0L);
    return done(LogValue::from_log(lb), "log-p-integral");
  }
  if (a < -1.0L) {
    long double aa = a;
    long double extra = 0.0L;
    if (b > 0.0L) {
      // (log i)^b <= (i^s / s)^b for s > 0; spend half the spare decay on it
      long double s = (-1.0L - a) / (2.0L * b);
      aa = a + s * b;          // = (a-1)/2 < -1
      extra = -b * std::log(s);
    } else if (b < 0.0L) {
      if (N < 3) return std::nullopt;  // rely on (log i)^b <= 1 for i >= 3
    }
    // sum_{i>N} C' i^aa <= C' * N^(aa+1) / (-aa-1)
    long double lb = m.log_coeff + extra +
                     (aa + 1.0L) * std::log((long double)N) - std::log(-aa - 1.0L);
    return done(LogValue::from_log(lb), "p-series-integral");
  }
  (void)t;
  return std::nullopt;
}

std::optional<LogValue> tail_sup_bound(const Monomial& m, const TermFn& t,
                                       std::uint64_t N, std::string* rule) {
  auto done = [&](LogValue v, const char* r) -> std::optional<LogValue> {
    if (rule) *rule = r;
    return v;
  };
  if (m.zero) return done(LogValue::zero(), "zero-tail");
  Limit lim = limit_at_infinity(m);
  if (lim.kind == LimitKind::infinite) return std::nullopt;

  if (auto dec = eventually_decreasing(m)) {
    auto from = threshold_to_index(dec->from);
    if (!from) return std::nullopt;
    if (*from <= N + 1) return done(t(N + 1), "monotone-tail");
    std::uint64_t lo = N + 1, hi = *from;
    if (hi - lo <= 65536) {
      LogValue best = LogValue::zero();
      for (std::uint64_t v = lo; v <= hi; ++v) best = LogValue::max(best, t(v));
      return done(best, "peak-scan");
    }
    if (certified_unimodal(m)) {
      std::uint64_t a = lo, b = hi;
      while (b - a > 8) {
        std::uint64_t m1 = a + (b - a) / 3;
        std::uint64_t m2 = b - (b - a) / 3;
        if (t(m1) < t(m2))
          a = m1 + 1;
        else
          b = m2;
      }
      LogValue best = LogValue::max(t(lo), t(hi));
      for (std::uint64_t v = a; v <= b; ++v) best = LogValue::max(best, t(v));
      return done(best, "peak-search");
    }
    return std::nullopt;
  }

  if (lim.kind == LimitKind::positive && lim.exact) {
    if (auto inc = eventually_increasing(m)) {
      auto from = threshold_to_index(inc->from);
      if (!from) return std::nullopt;
      LogValue cap = LogValue::from_log(lim.log_value);
      if (*from <= N + 1) return done(cap, "increasing-to-limit");
      if (*from - (N + 1) <= 65536) {
        LogValue best = cap;
        for (std::uint64_t v = N + 1; v <= *from; ++v) best = LogValue::max(best, t(v));
        return done(best, "scan-then-limit");
      }
    }
  }
  return std::nullopt;
}

bool exp_part_level_free(const dsl::ExprPtr& e) {
  auto mentions_index = [](const dsl::ExprPtr& x) {
    return x->contains(Var::i) || x->contains(Var::j);
  };
  switch (e->op) {
    case Op::number:
    case Op::var:
      return true;
    case Op::pow: {
      const auto& base = e->kids[0];
      const auto& ex = e->kids[1];
      if (mentions_index(ex))
        return !base->contains(Var::k) && !ex->contains(Var::k);
      return exp_part_level_free(base);
    }
    case Op::exp:
      if (mentions_index(e->kids[0])) return !e->kids[0]->contains(Var::k);
      return true;
    case Op::piecewise:
      if (e->contains(Var::k) && mentions_index(e)) return false;
      break;
    default:
      break;
  }
  for (const auto& kid : e->kids)
    if (!exp_part_level_free(kid)) return false;
  return true;
}

}  // namespace koethe::growth
