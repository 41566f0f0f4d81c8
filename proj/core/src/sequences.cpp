#include "koethe/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "koethe/errors.hpp"
#include "koethe/growth.hpp"
#include "koethe/relations.hpp"

namespace koethe {

namespace {

using dsl::Expr;
using dsl::ExprPtr;
using dsl::Op;
using dsl::Var;

constexpr double two_pi = 6.283185307179586476925286766559;

bool rule_is_zero(const dsl::ExprPtr& rule) {
  if (!rule) return true;
  auto c = dsl::constant_value(rule);
  return c && *c == 0.0L;
}

LogValue eval_tail_rule(const dsl::ExprPtr& rule, std::uint64_t rank) {
  if (rule->contains(Var::j))
    throw PreconditionError("tail rules must be functions of the scalar index");
  dsl::Bindings b;
  b.i = static_cast<long double>(rank);
  return rule->eval(b);
}

}  // namespace

// ---------------------------------------------------------------------------
// Coeff

std::complex<double> Coeff::to_complex() const {
  return std::polar(magnitude.value_d(), phase);
}

Coeff Coeff::from_complex(std::complex<double> z) {
  if (z == std::complex<double>(0.0, 0.0)) return Coeff{};
  return Coeff{LogValue::from_value(std::abs(z)), std::arg(z)};
}

// ---------------------------------------------------------------------------
// SeqElement

SeqElement SeqElement::zero(std::uint64_t N) {
  SeqElement x;
  x.N_ = N;
  return x;
}

SeqElement SeqElement::unit(std::uint64_t rank, std::uint64_t N) {
  if (rank == 0) throw ConfigError("ranks are 1-based");
  SeqElement x;
  x.N_ = std::max(N, rank);
  x.support_.emplace_back(rank, Coeff{LogValue::one(), 0.0});
  return x;
}

SeqElement SeqElement::from_dense(const std::vector<std::complex<double>>& values) {
  SeqElement x;
  x.N_ = values.size();
  for (std::size_t n = 0; n < values.size(); ++n)
    if (values[n] != std::complex<double>(0.0, 0.0))
      x.support_.emplace_back(n + 1, Coeff::from_complex(values[n]));
  return x;
}

SeqElement SeqElement::from_abs_expr(const dsl::ExprPtr& abs_expr, const IndexSet& idx,
                                     std::uint64_t N, bool as_tail_rule) {
  if (!abs_expr) throw ConfigError("missing coefficient rule");
  if (abs_expr->contains(Var::k))
    throw ConfigError("coefficient rules may not mention the level variable");
  dsl::validate_weight_expr(abs_expr, idx, /*allow_level_var=*/false);
  SeqElement x;
  x.N_ = idx.scan_count(N);
  for (std::uint64_t r = 1; r <= x.N_; ++r) {
    Index ix = idx.at(r);
    dsl::Bindings b;
    b.i = static_cast<long double>(ix.i);
    if (ix.is_pair()) b.j = static_cast<long double>(ix.j);
    LogValue v = abs_expr->eval(b);
    if (!v.is_zero()) x.support_.emplace_back(r, Coeff{v, 0.0});
  }
  // Only scalar enumerations admit a rank-evaluable closed form past N.
  if (as_tail_rule && idx.kind() == IndexSet::Kind::naturals) x.tail_rule_ = abs_expr;
  return x;
}

Coeff SeqElement::at(std::uint64_t rank) const {
  auto it = std::lower_bound(
      support_.begin(), support_.end(), rank,
      [](const std::pair<std::uint64_t, Coeff>& e, std::uint64_t r) { return e.first < r; });
  if (it != support_.end() && it->first == rank) return it->second;
  return Coeff{};
}

LogValue SeqElement::abs_at(std::uint64_t rank) const {
  if (rank <= N_ || !tail_rule_) return at(rank).magnitude;
  return eval_tail_rule(tail_rule_, rank);
}

void SeqElement::set(std::uint64_t rank, Coeff c) {
  if (rank == 0) throw ConfigError("ranks are 1-based");
  N_ = std::max(N_, rank);
  auto it = std::lower_bound(
      support_.begin(), support_.end(), rank,
      [](const std::pair<std::uint64_t, Coeff>& e, std::uint64_t r) { return e.first < r; });
  if (it != support_.end() && it->first == rank) {
    if (c.magnitude.is_zero())
      support_.erase(it);
    else
      it->second = c;
    return;
  }
  if (!c.magnitude.is_zero()) support_.insert(it, {rank, c});
}

bool SeqElement::same_support_and_values(const SeqElement& other) const {
  if (support_.size() != other.support_.size()) return false;
  for (std::size_t t = 0; t < support_.size(); ++t) {
    const auto& [ra, ca] = support_[t];
    const auto& [rb, cb] = other.support_[t];
    if (ra != rb) return false;
    if (ca.magnitude.log() != cb.magnitude.log()) return false;
    if (ca.phase != cb.phase) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Seminorms

LogValue SeminormValue::total() const {
  if (tail_bound) return partial + *tail_bound;
  return partial;
}

namespace {

// Shared tail machinery: the term |x_i| * p^(k)_i as an expression over
// the scalar index, its growth normal form, and the true term function.
struct TailSetup {
  std::optional<growth::Monomial> mono;
  growth::TermFn fn;
};

std::optional<TailSetup> tail_setup(const SeqElement& x, const WeightFamily& P,
                                    std::uint64_t k) {
  if (!x.tail_rule() || P.index_set().kind() != IndexSet::Kind::naturals)
    return std::nullopt;
  ExprPtr ep = P.level_expr(k);
  if (!ep) return std::nullopt;
  TailSetup ts;
  ts.mono = growth::analyze(Expr::node(Op::mul, {x.tail_rule(), ep}), Var::i, {});
  if (!ts.mono) return std::nullopt;
  ExprPtr rule = x.tail_rule();
  const WeightFamily* fam = &P;
  ts.fn = [rule, fam, k](std::uint64_t v) {
    dsl::Bindings b;
    b.i = static_cast<long double>(v);
    return rule->eval(b) * fam->weight_at_rank(k, v);
  };
  return ts;
}

}  // namespace

SeminormValue seminorm_l1(const SeqElement& x, const WeightFamily& P, std::uint64_t k) {
  SeminormValue out;
  for (const auto& [rank, c] : x.support())
    out.partial = out.partial + c.magnitude * P.weight_at_rank(k, rank);

  if (rule_is_zero(x.tail_rule())) {
    out.tail_bound = LogValue::zero();
    out.status = SeminormStatus::converged;
    out.rule = "finite-support";
    return out;
  }
  auto ts = tail_setup(x, P, k);
  if (!ts) {
    out.status = SeminormStatus::unknown;
    out.rule = "tail-outside-catalog";
    return out;
  }
  growth::Series cls = growth::series(*ts->mono);
  if (cls.kind == growth::SeriesKind::diverges) {
    out.status = SeminormStatus::diverging;
    out.rule = cls.rule;
    return out;
  }
  std::string rule;
  if (auto bound = growth::tail_sum_bound(*ts->mono, ts->fn, x.truncation(), &rule)) {
    out.tail_bound = *bound;
    out.status = SeminormStatus::converged;
    out.rule = rule;
    return out;
  }
  if (cls.kind == growth::SeriesKind::converges) {
    out.status = SeminormStatus::converged;
    out.rule = cls.rule + " (no numeric tail bound)";
  } else {
    out.status = SeminormStatus::unknown;
    out.rule = "tail-outside-catalog";
  }
  return out;
}

SeminormValue seminorm_sup(const SeqElement& x, const WeightFamily& P, std::uint64_t k) {
  SeminormValue out;
  for (const auto& [rank, c] : x.support())
    out.partial = LogValue::max(out.partial, c.magnitude * P.weight_at_rank(k, rank));

  if (rule_is_zero(x.tail_rule())) {
    out.tail_bound = LogValue::zero();
    out.status = SeminormStatus::converged;
    out.rule = "finite-support";
    return out;
  }
  auto ts = tail_setup(x, P, k);
  if (!ts) {
    out.status = SeminormStatus::unknown;
    out.rule = "tail-outside-catalog";
    return out;
  }
  if (growth::limit_at_infinity(*ts->mono).kind == growth::LimitKind::infinite) {
    out.status = SeminormStatus::diverging;
    out.rule = "growth-limit-infinite";
    return out;
  }
  std::string rule;
  if (auto bound = growth::tail_sup_bound(*ts->mono, ts->fn, x.truncation(), &rule)) {
    out.tail_bound = *bound;
    out.status = SeminormStatus::converged;
    out.rule = rule;
    return out;
  }
  out.status = SeminormStatus::unknown;
  out.rule = "tail-outside-catalog";
  return out;
}

// ---------------------------------------------------------------------------
// Products

SeqElement pointwise_mul(const SeqElement& x, const SeqElement& y) {
  SeqElement out = SeqElement::zero(std::max(x.truncation(), y.truncation()));

  auto coeff_full = [](const SeqElement& e, std::uint64_t rank) -> Coeff {
    if (rank <= e.truncation() || !e.tail_rule()) return e.at(rank);
    return Coeff{eval_tail_rule(e.tail_rule(), rank), 0.0};
  };

  const auto& sx = x.support();
  const auto& sy = y.support();
  std::size_t a = 0, b = 0;
  while (a < sx.size() || b < sy.size()) {
    std::uint64_t rank;
    if (b >= sy.size())
      rank = sx[a].first;
    else if (a >= sx.size())
      rank = sy[b].first;
    else
      rank = std::min(sx[a].first, sy[b].first);
    Coeff cx = coeff_full(x, rank);
    Coeff cy = coeff_full(y, rank);
    if (!cx.magnitude.is_zero() && !cy.magnitude.is_zero())
      out.set(rank, Coeff{cx.magnitude * cy.magnitude,
                          std::remainder(cx.phase + cy.phase, two_pi)});
    while (a < sx.size() && sx[a].first <= rank) ++a;
    while (b < sy.size() && sy[b].first <= rank) ++b;
  }
  if (x.tail_rule() && y.tail_rule())
    out.set_tail_rule(Expr::node(Op::mul, {x.tail_rule(), y.tail_rule()}));
  return out;
}

MulBoundReport mul_bound_check(const SeqElement& x, const SeqElement& y,
                               const WeightFamily& P, std::uint64_t k,
                               std::uint64_t depth) {
  Verdict alg = is_algebra(P, depth, 8);
  if (!alg.holds() || !alg.certificate.contains("levels"))
    throw PreconditionError("the multiplication estimate needs a certified algebra");
  std::vector<LevelCert> certs = level_certs_from_json(alg.certificate["levels"]);
  const LevelCert* cert = nullptr;
  for (const LevelCert& c : certs)
    if (c.source_level == k) {
      cert = &c;
      break;
    }
  if (!cert)
    throw PreconditionError("the algebra certificate does not cover level " +
                            std::to_string(k));

  MulBoundReport rep;
  rep.p_level = k;
  rep.q_level = cert->target_level;
  rep.logC = cert->logC;
  rep.rule = cert->proof_rule;

  // p^(k) <= C (p^(q))^2 pointwise gives, on any common prefix,
  // sum |x y| p^(k) <= C (sum |x| p^(q)) (sum |y| p^(q)).
  SeqElement xy = pointwise_mul(x, y);
  auto prefix_l1 = [&](const SeqElement& e, std::uint64_t level) {
    LogValue s = LogValue::zero();
    for (const auto& [rank, c] : e.support()) {
      if (rank > depth) break;
      s = s + c.magnitude * P.weight_at_rank(level, rank);
    }
    return s;
  };
  rep.lhs = prefix_l1(xy, k);
  rep.rhs = LogValue::from_log(cert->logC) * prefix_l1(x, rep.q_level) *
            prefix_l1(y, rep.q_level);
  rep.holds = !(rep.rhs < rep.lhs);
  return rep;
}

// ---------------------------------------------------------------------------
// Membership

Verdict membership(const SeqElement& x, const WeightFamily& P, std::uint64_t depth,
                   std::uint64_t level_budget) {
  if (depth == 0 || level_budget == 0)
    throw ConfigError("depth and level budget must be positive");

  if (rule_is_zero(x.tail_rule()))
    return Verdict::holds_exact("finite-support", depth,
                                "finitely many coefficients lie in every level");

  const std::uint64_t K = P.capped_level_count(level_budget);
  const bool complete = P.level_count() && *P.level_count() <= K;
  const bool scalar = P.index_set().kind() == IndexSet::Kind::naturals;

  nlohmann::json levels = nlohmann::json::array();
  bool all_converged = true;
  bool all_exp_class = true;
  for (std::uint64_t k = 1; k <= K; ++k) {
    std::string rule = "outside-catalog";
    bool converged = false;
    if (scalar) {
      if (ExprPtr ep = P.level_expr(k)) {
        auto mono = growth::analyze(Expr::node(Op::mul, {x.tail_rule(), ep}), Var::i, {});
        if (mono) {
          growth::Series cls = growth::series(*mono);
          rule = cls.rule;
          if (cls.kind == growth::SeriesKind::diverges)
            return Verdict::fails_exact(
                "tail-divergence", depth,
                "the level-" + std::to_string(k) + " series diverges (" + cls.rule + ")",
                {{"witness_level", k}, {"rule", cls.rule}, {"levels", levels}});
          converged = cls.kind == growth::SeriesKind::converges;
        }
      }
    }
    all_converged = all_converged && converged;
    all_exp_class = all_exp_class && converged &&
                    (rule == "exponential-decay" || rule == "zero-terms");
    levels.push_back({{"level", k},
                      {"status", converged ? "converged" : "unknown"},
                      {"rule", rule}});
  }

  if (all_converged && complete)
    return Verdict::holds_exact("per-level-series", depth,
                                "every level's series certified convergent",
                                {{"levels", levels}});
  if (all_converged && all_exp_class && P.symbolic_expr() &&
      growth::exp_part_level_free(
          Expr::node(Op::mul, {x.tail_rule(), P.symbolic_expr()})))
    return Verdict::holds_exact(
        "level-free-exponent", depth,
        "the exponentially decaying factor of the terms does not involve the level, "
        "so convergence at the scanned levels extends to every level",
        {{"levels", levels}});

  return Verdict::unknown_at(
      depth,
      all_converged ? "scanned levels converge but no uniform rule covers the rest"
                    : "some level series resisted classification",
      {{"levels", levels}});
}

Verdict dual_membership(const SeqElement& y, const std::vector<SeqElement>& generators,
                        std::uint64_t depth) {
  if (depth == 0) throw ConfigError("depth must be positive");
  if (generators.empty())
    return Verdict::unknown_at(depth, "no generators supplied for the pairing");

  nlohmann::json samples = nlohmann::json::array();
  bool all_converged = true;
  for (std::size_t g = 0; g < generators.size(); ++g) {
    SeqElement prod = pointwise_mul(generators[g], y);
    LogValue partial = LogValue::zero();
    for (const auto& [rank, c] : prod.support()) {
      if (rank > depth) break;
      partial = partial + c.magnitude;
    }
    std::string rule = "prefix-only";
    bool converged = !prod.tail_rule();
    if (prod.tail_rule()) {
      if (auto mono = growth::analyze(prod.tail_rule(), Var::i, {})) {
        growth::Series cls = growth::series(*mono);
        rule = cls.rule;
        if (cls.kind == growth::SeriesKind::diverges)
          return Verdict::fails_exact(
              "sample-divergence", depth,
              "the pairing against generator " + std::to_string(g + 1) + " diverges (" +
                  cls.rule + ")",
              {{"generator", g + 1}, {"rule", cls.rule}});
        converged = cls.kind == growth::SeriesKind::converges;
      }
    }
    all_converged = all_converged && converged;
    samples.push_back({{"generator", g + 1},
                       {"partial_log", static_cast<double>(partial.log())},
                       {"rule", rule}});
  }

  if (all_converged) {
    Verdict v;
    v.outcome = Outcome::holds;
    v.tier = Tier::empirical;
    v.depth = depth;
    v.rule = "sample-pairing";
    v.detail = "every sampled pairing converges; a necessary condition only";
    v.certificate = {{"samples", samples}};
    return v;
  }
  return Verdict::unknown_at(depth, "some sampled pairings resisted classification",
                             {{"samples", samples}});
}

// ---------------------------------------------------------------------------
// Taylor-coefficient arithmetic

CoeffSeq hadamard_mul(const CoeffSeq& f, const CoeffSeq& g, std::size_t N) {
  CoeffSeq out(N, std::complex<double>(0.0, 0.0));
  const std::size_t M = std::min({N, f.size(), g.size()});
  for (std::size_t n = 0; n < M; ++n) out[n] = f[n] * g[n];
  return out;
}

CoeffSeq taylor_geometric(std::size_t N) {
  return CoeffSeq(N, std::complex<double>(1.0, 0.0));
}

CoeffSeq taylor_exp(std::size_t N) {
  CoeffSeq out(N);
  double term = 1.0;
  for (std::size_t n = 0; n < N; ++n) {
    out[n] = term;
    term /= static_cast<double>(n + 1);
  }
  return out;
}

CoeffSeq taylor_poly(const std::vector<std::complex<double>>& coeffs, std::size_t N) {
  CoeffSeq out(N, std::complex<double>(0.0, 0.0));
  for (std::size_t n = 0; n < std::min(N, coeffs.size()); ++n) out[n] = coeffs[n];
  return out;
}

}  // namespace koethe
