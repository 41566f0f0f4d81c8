#include "koethe/canon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace koethe::canon {

using dsl::Expr;
using dsl::ExprPtr;
using dsl::Op;
using dsl::Var;

namespace {

bool is_number(const ExprPtr& e, long double x) {
  return e && e->op == Op::number && e->number == x;
}

ExprPtr simplify_mul(const ExprPtr& a, const ExprPtr& b) {
  auto ca = dsl::constant_value(a);
  auto cb = dsl::constant_value(b);
  if (ca && cb) return Expr::num(*ca * *cb);
  if (ca) {
    if (*ca == 0.0L) return Expr::num(0.0L);
    if (*ca == 1.0L) return b;
    return Expr::node(Op::mul, {Expr::num(*ca), b});
  }
  if (cb) {
    if (*cb == 0.0L) return Expr::num(0.0L);
    if (*cb == 1.0L) return a;
    return Expr::node(Op::mul, {Expr::num(*cb), a});
  }
  return Expr::node(Op::mul, {a, b});
}

ExprPtr simplify_div(const ExprPtr& a, const ExprPtr& b) {
  auto ca = dsl::constant_value(a);
  auto cb = dsl::constant_value(b);
  if (ca && cb && *cb != 0.0L) return Expr::num(*ca / *cb);
  if (ca && *ca == 0.0L) return Expr::num(0.0L);
  if (cb && *cb == 1.0L) return a;
  return Expr::node(Op::div, {a, b});
}

// Multiplicative flattening of a single additive term: numeric coefficient
// times a canonically ordered product of non-numeric atoms.
void flatten_term(const ExprPtr& e, long double& coeff, std::vector<ExprPtr>& atoms) {
  if (!e) return;
  if (auto c = dsl::constant_value(e)) {
    coeff *= *c;
    return;
  }
  switch (e->op) {
    case Op::mul:
      flatten_term(e->kids[0], coeff, atoms);
      flatten_term(e->kids[1], coeff, atoms);
      return;
    case Op::div:
      if (auto c = dsl::constant_value(e->kids[1]); c && *c != 0.0L) {
        coeff /= *c;
        flatten_term(e->kids[0], coeff, atoms);
        return;
      }
      break;
    default:
      break;
  }
  atoms.push_back(e);
}

struct TermKey {
  std::string key;
  ExprPtr core;  // null for the pure-number bucket
  long double coeff = 0.0L;
};

ExprPtr rebuild_term(long double coeff, const ExprPtr& core) {
  if (!core) return Expr::num(coeff);
  if (coeff == 1.0L) return core;
  return Expr::node(Op::mul, {Expr::num(coeff), core});
}

void collect_sum(const ExprPtr& e, long double sign, std::vector<TermKey>& out) {
  if (!e) return;
  if (e->op == Op::add) {
    collect_sum(e->kids[0], sign, out);
    collect_sum(e->kids[1], sign, out);
    return;
  }
  if (e->op == Op::sub) {
    collect_sum(e->kids[0], sign, out);
    collect_sum(e->kids[1], -sign, out);
    return;
  }
  long double coeff = sign;
  std::vector<ExprPtr> atoms;
  flatten_term(e, coeff, atoms);
  // Distribute the term over one additive atom so cross terms can cancel,
  // e.g. k - (k+2) or i*k - i*(k+1).
  for (std::size_t t = 0; t < atoms.size(); ++t) {
    const ExprPtr& a = atoms[t];
    if (a->op != Op::add && a->op != Op::sub) continue;
    ExprPtr rest;
    for (std::size_t u = 0; u < atoms.size(); ++u) {
      if (u == t) continue;
      rest = rest ? Expr::node(Op::mul, {rest, atoms[u]}) : atoms[u];
    }
    auto with_rest = [&rest](const ExprPtr& piece) {
      return rest ? Expr::node(Op::mul, {rest, piece}) : piece;
    };
    collect_sum(with_rest(a->kids[0]), coeff, out);
    collect_sum(with_rest(a->kids[1]), a->op == Op::sub ? -coeff : coeff, out);
    return;
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const ExprPtr& a, const ExprPtr& b) { return a->str() < b->str(); });
  ExprPtr core;
  for (const auto& a : atoms) core = core ? Expr::node(Op::mul, {core, a}) : a;
  std::string key = core ? core->str() : std::string();
  for (auto& t : out) {
    if (t.key == key) {
      t.coeff += coeff;
      return;
    }
  }
  out.push_back(TermKey{std::move(key), core, coeff});
}

ExprPtr negate(const ExprPtr& e) {
  if (auto c = dsl::constant_value(e)) return Expr::num(-*c);
  return simplify_mul(Expr::num(-1.0L), e);
}

void merge_factor(std::vector<Factor>& factors, const ExprPtr& base, const ExprPtr& exponent) {
  for (auto it = factors.begin(); it != factors.end(); ++it) {
    bool same = (!it->base && !base) ||
                (it->base && base && dsl::structurally_equal(it->base, base));
    if (!same) continue;
    ExprPtr merged = make_sum({it->exponent, exponent});
    if (is_number(merged, 0.0L)) {
      factors.erase(it);
    } else {
      it->exponent = merged;
    }
    return;
  }
  if (!is_number(exponent, 0.0L)) factors.push_back(Factor{base, exponent});
}

void scale_exponents(Product& p, const ExprPtr& g) {
  for (auto& f : p.factors) f.exponent = simplify_mul(f.exponent, g);
}

}  // namespace

ExprPtr make_sum(std::vector<ExprPtr> terms) {
  std::vector<TermKey> buckets;
  long double constant = 0.0L;
  for (const auto& t : terms) collect_sum(t, 1.0L, buckets);
  ExprPtr out;
  for (const auto& b : buckets) {
    if (!b.core) {
      constant += b.coeff;
      continue;
    }
    if (b.coeff == 0.0L) continue;
    ExprPtr term = rebuild_term(b.coeff, b.core);
    out = out ? Expr::node(Op::add, {out, term}) : term;
  }
  if (constant != 0.0L || !out) {
    ExprPtr c = Expr::num(constant);
    out = out ? Expr::node(Op::add, {out, c}) : c;
  }
  return out;
}

bool Product::index_free() const {
  for (const auto& f : factors) {
    if (f.base && (f.base->contains(Var::i) || f.base->contains(Var::j))) return false;
    if (f.exponent->contains(Var::i) || f.exponent->contains(Var::j)) return false;
  }
  return true;
}

bool Product::level_free() const {
  for (const auto& f : factors) {
    if (f.base && f.base->contains(Var::k)) return false;
    if (f.exponent->contains(Var::k)) return false;
  }
  return true;
}

ExprPtr Product::to_expr() const {
  ExprPtr out;
  if (log_const != 0.0L) out = Expr::num(std::exp(log_const));
  for (const auto& f : factors) {
    ExprPtr piece;
    if (!f.base) {
      piece = Expr::node(Op::exp, {f.exponent});
    } else if (is_number(f.exponent, 1.0L)) {
      piece = f.base;
    } else {
      piece = Expr::node(Op::pow, {f.base, f.exponent});
    }
    out = out ? Expr::node(Op::mul, {out, piece}) : piece;
  }
  return out ? out : Expr::num(1.0L);
}

Product factorize(const ExprPtr& e) {
  Product p;
  if (!e) {
    p.ok = false;
    return p;
  }
  if (auto c = dsl::constant_value(e)) {
    if (*c > 0.0L) {
      p.log_const = std::log(*c);
    } else if (*c == 0.0L) {
      p.log_const = -std::numeric_limits<long double>::infinity();
    } else {
      p.ok = false;
    }
    return p;
  }
  switch (e->op) {
    case Op::mul: {
      Product a = factorize(e->kids[0]);
      Product b = factorize(e->kids[1]);
      p.ok = a.ok && b.ok;
      p.log_const = a.log_const + b.log_const;
      p.factors = std::move(a.factors);
      for (const auto& f : b.factors) merge_factor(p.factors, f.base, f.exponent);
      return p;
    }
    case Op::div: {
      Product a = factorize(e->kids[0]);
      Product b = factorize(e->kids[1]);
      p.ok = a.ok && b.ok;
      p.log_const = a.log_const - b.log_const;
      p.factors = std::move(a.factors);
      for (const auto& f : b.factors) merge_factor(p.factors, f.base, negate(f.exponent));
      return p;
    }
    case Op::pow: {
      Product base = factorize(e->kids[0]);
      const ExprPtr& g = e->kids[1];
      if (!base.ok) {
        p.ok = false;
        p.factors.push_back(Factor{e->kids[0], g});
        return p;
      }
      scale_exponents(base, g);
      if (base.log_const != 0.0L) {
        if (auto cg = dsl::constant_value(g)) {
          base.log_const *= *cg;
        } else {
          // c^g = exp(g * log c): fold the constant into a base-e factor.
          merge_factor(base.factors, nullptr, simplify_mul(Expr::num(base.log_const), g));
          base.log_const = 0.0L;
        }
      }
      // Scaling may have zeroed an exponent; drop such factors.
      Product out;
      out.ok = true;
      out.log_const = base.log_const;
      for (const auto& f : base.factors) merge_factor(out.factors, f.base, f.exponent);
      return out;
    }
    case Op::exp:
      p.factors.push_back(Factor{nullptr, e->kids[0]});
      return p;
    default:
      p.factors.push_back(Factor{e, Expr::num(1.0L)});
      return p;
  }
}

Product ratio(const ExprPtr& a, const ExprPtr& b) {
  Product pa = factorize(a);
  Product pb = factorize(b);
  Product out;
  out.ok = pa.ok && pb.ok;
  out.log_const = pa.log_const - pb.log_const;
  out.factors = std::move(pa.factors);
  for (const auto& f : pb.factors) merge_factor(out.factors, f.base, negate(f.exponent));
  return out;
}

std::optional<AffineInK> affine_in_k(const ExprPtr& e) {
  if (!e) return std::nullopt;
  if (!e->contains(Var::k)) return AffineInK{e, nullptr};
  if (e->op == Op::var && e->var == Var::k) {
    return AffineInK{Expr::num(0.0L), Expr::num(1.0L)};
  }
  auto combine = [](const ExprPtr& a, const ExprPtr& b, bool subtract) {
    return subtract ? make_sum({a, negate(b)}) : make_sum({a, b});
  };
  switch (e->op) {
    case Op::add:
    case Op::sub: {
      auto l = affine_in_k(e->kids[0]);
      auto r = affine_in_k(e->kids[1]);
      if (!l || !r) return std::nullopt;
      bool subtract = e->op == Op::sub;
      ExprPtr zero = Expr::num(0.0L);
      ExprPtr slope = combine(l->slope ? l->slope : zero, r->slope ? r->slope : zero, subtract);
      return AffineInK{combine(l->constant, r->constant, subtract),
                       is_number(slope, 0.0L) ? nullptr : slope};
    }
    case Op::mul: {
      const bool left_free = !e->kids[0]->contains(Var::k);
      const bool right_free = !e->kids[1]->contains(Var::k);
      if (!left_free && !right_free) return std::nullopt;
      const ExprPtr& free_side = left_free ? e->kids[0] : e->kids[1];
      auto inner = affine_in_k(left_free ? e->kids[1] : e->kids[0]);
      if (!inner || !inner->slope) return std::nullopt;
      return AffineInK{simplify_mul(free_side, inner->constant),
                       simplify_mul(free_side, inner->slope)};
    }
    case Op::div: {
      if (e->kids[1]->contains(Var::k)) return std::nullopt;
      auto inner = affine_in_k(e->kids[0]);
      if (!inner || !inner->slope) return std::nullopt;
      return AffineInK{simplify_div(inner->constant, e->kids[1]),
                       simplify_div(inner->slope, e->kids[1])};
    }
    default:
      return std::nullopt;
  }
}

std::optional<long double> proportional(const ExprPtr& a, const ExprPtr& b) {
  Product r = ratio(a, b);
  if (!r.ok || !r.factors.empty()) return std::nullopt;
  return std::exp(r.log_const);
}

bool structurally_nonneg(const ExprPtr& e) {
  if (!e) return false;
  if (auto c = dsl::constant_value(e)) return *c >= 0.0L;
  switch (e->op) {
    case Op::number:
      return e->number >= 0.0L;
    case Op::var:
      return true;  // domain is i, j, k >= 1
    case Op::add:
    case Op::mul:
    case Op::div:
    case Op::min:
    case Op::max:
      return structurally_nonneg(e->kids[0]) && structurally_nonneg(e->kids[1]);
    case Op::sub: {
      if (structurally_nonneg(e->kids[0]) && structurally_nonpos(e->kids[1])) return true;
      // a - c*a >= 0 when c <= 1 and a >= 0.
      if (auto c = proportional(e->kids[1], e->kids[0])) {
        return *c <= 1.0L && structurally_nonneg(e->kids[0]);
      }
      return false;
    }
    case Op::pow:
      return structurally_nonneg(e->kids[0]);
    case Op::exp:
      return true;
    case Op::log:
      return structurally_ge_one(e->kids[0]);
    case Op::piecewise:
      return structurally_nonneg(e->kids[2]) && structurally_nonneg(e->kids[3]);
  }
  return false;
}

bool structurally_nonpos(const ExprPtr& e) {
  if (!e) return false;
  if (auto c = dsl::constant_value(e)) return *c <= 0.0L;
  switch (e->op) {
    case Op::number:
      return e->number <= 0.0L;
    case Op::add:
      return structurally_nonpos(e->kids[0]) && structurally_nonpos(e->kids[1]);
    case Op::sub: {
      if (structurally_nonpos(e->kids[0]) && structurally_nonneg(e->kids[1])) return true;
      // a - c*... : a - b <= 0 when a = c*b with c <= 1 and b >= 0.
      if (auto c = proportional(e->kids[0], e->kids[1])) {
        return *c <= 1.0L && structurally_nonneg(e->kids[1]);
      }
      return false;
    }
    case Op::mul:
    case Op::div:
      return (structurally_nonpos(e->kids[0]) && structurally_nonneg(e->kids[1])) ||
             (structurally_nonneg(e->kids[0]) && structurally_nonpos(e->kids[1]));
    case Op::min:
      return structurally_nonpos(e->kids[0]) || structurally_nonpos(e->kids[1]);
    case Op::max:
      return structurally_nonpos(e->kids[0]) && structurally_nonpos(e->kids[1]);
    case Op::piecewise:
      return structurally_nonpos(e->kids[2]) && structurally_nonpos(e->kids[3]);
    default:
      return false;
  }
}

bool structurally_ge_one(const ExprPtr& e) {
  if (!e) return false;
  if (auto c = dsl::constant_value(e)) return *c >= 1.0L;
  switch (e->op) {
    case Op::var:
      return true;
    case Op::add:
      return (structurally_ge_one(e->kids[0]) && structurally_nonneg(e->kids[1])) ||
             (structurally_nonneg(e->kids[0]) && structurally_ge_one(e->kids[1]));
    case Op::sub:
      return structurally_ge_one(e->kids[0]) && structurally_nonpos(e->kids[1]);
    case Op::mul:
      return structurally_ge_one(e->kids[0]) && structurally_ge_one(e->kids[1]);
    case Op::pow:
      return structurally_ge_one(e->kids[0]) && structurally_nonneg(e->kids[1]);
    case Op::exp:
      return structurally_nonneg(e->kids[0]);
    case Op::min:
      return structurally_ge_one(e->kids[0]) && structurally_ge_one(e->kids[1]);
    case Op::max:
      return structurally_ge_one(e->kids[0]) || structurally_ge_one(e->kids[1]);
    case Op::piecewise:
      return structurally_ge_one(e->kids[2]) && structurally_ge_one(e->kids[3]);
    default:
      return false;
  }
}

}  // namespace koethe::canon
