#include "koethe/relations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "koethe/canon.hpp"
#include "koethe/errors.hpp"
#include "koethe/growth.hpp"

namespace koethe {

namespace {

using dsl::Expr;
using dsl::ExprPtr;
using dsl::Op;
using dsl::Var;

constexpr long double kNegInf = -std::numeric_limits<long double>::infinity();

std::string fmt_ld(long double v) {
  std::ostringstream os;
  os.precision(12);
  os << static_cast<double>(v);
  return os.str();
}

// ---------------------------------------------------------------------------
// sup_i p^(k)_i / q^(m)_i for one level pair.

struct SupScan {
  enum class Kind { finite, infinite, unknown };
  Kind kind = Kind::unknown;
  long double logC = 0.0L;  // for finite
  std::string rule;
  long double prefix_log_sup = kNegInf;
  std::uint64_t arg = 0;
  std::uint64_t scanned = 0;
};

LogValue ratio_term(const WeightFamily& P, std::uint64_t k, const WeightFamily& Q,
                    std::uint64_t m, std::uint64_t rank) {
  LogValue p = P.weight_at_rank(k, rank);
  if (p.is_zero()) return LogValue::zero();
  return p / Q.weight_at_rank(m, rank);
}

SupScan sup_ratio(const WeightFamily& P, std::uint64_t k, const WeightFamily& Q,
                  std::uint64_t m, std::uint64_t depth) {
  SupScan out;
  const IndexSet& idx = P.index_set();

  ExprPtr ep = P.level_expr(k);
  ExprPtr eq = Q.level_expr(m);
  if (ep && eq) {
    canon::Product pr = canon::ratio(ep, eq);
    if (pr.ok && pr.factors.empty()) {
      out.kind = SupScan::Kind::finite;
      out.logC = std::isfinite(pr.log_const) ? pr.log_const : 0.0L;
      out.rule = "constant-ratio";
      return out;
    }
  }

  const std::uint64_t N = idx.scan_count(std::min<std::uint64_t>(depth, 8192));
  LogValue best = LogValue::zero();
  for (std::uint64_t r = 1; r <= N; ++r) {
    LogValue t = ratio_term(P, k, Q, m, r);
    if (t.is_infinite()) {
      out.kind = SupScan::Kind::infinite;
      out.rule = "zero-target-weight";
      out.arg = r;
      return out;
    }
    if (best < t) {
      best = t;
      out.arg = r;
    }
  }
  out.prefix_log_sup = best.log();
  out.scanned = N;

  if (idx.is_finite() && N >= *idx.count()) {
    out.kind = SupScan::Kind::finite;
    out.logC = best.log();
    out.rule = "finite-index-scan";
    return out;
  }
  if (!ep || !eq || idx.kind() != IndexSet::Kind::naturals) return out;

  ExprPtr r = Expr::node(Op::div, {ep, eq});
  auto mono = growth::analyze(r, Var::i, {});
  if (!mono) return out;
  auto lim = growth::limit_at_infinity(*mono);
  if (lim.kind == growth::LimitKind::infinite) {
    out.kind = SupScan::Kind::infinite;
    out.rule = "growth-limit-infinite";
    return out;
  }
  std::string rule;
  auto term = [&](std::uint64_t v) { return ratio_term(P, k, Q, m, v); };
  if (auto bound = growth::tail_sup_bound(*mono, term, N, &rule)) {
    out.kind = SupScan::Kind::finite;
    out.logC = LogValue::max(best, *bound).log();
    out.rule = rule;
    return out;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Uniform rules.

// Same-alpha power grids: domination reduces to comparing radius suprema.
std::optional<Verdict> grid_rule(const WeightFamily& P, const WeightFamily& Q,
                                 std::uint64_t depth, std::uint64_t level_budget) {
  const auto& gp = P.power_grid();
  const auto& gq = Q.power_grid();
  if (!gp || !gq || !dsl::structurally_equal(gp->alpha, gq->alpha)) return std::nullopt;

  const long double supP = gp->sup_log_r();
  const long double supQ = gq->sup_log_r();
  if (supP <= supQ) {
    std::vector<LevelCert> certs;
    for (std::uint64_t k = 1; k <= level_budget; ++k) {
      long double want = gp->log_r(k);
      std::uint64_t lo = 1, hi = 1;
      while (gq->log_r(hi) < want) {
        lo = hi + 1;
        hi *= 2;
        if (hi > (1ULL << 40)) break;
      }
      while (lo < hi) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        if (gq->log_r(mid) >= want)
          hi = mid;
        else
          lo = mid + 1;
      }
      certs.push_back({k, lo, 0.0L, "power-grid", depth});
    }
    return Verdict::holds_exact(
        "power-grid", depth,
        "radius supremum " + fmt_ld(supP) + " (log) does not exceed " + fmt_ld(supQ) +
            "; each level radius is cleared by a later target radius with C = 1",
        {{"levels", level_certs_json(certs)},
         {"uniform", true},
         {"source_sup_log_r", static_cast<double>(supP)},
         {"target_sup_log_r", static_cast<double>(supQ)}});
  }

  std::uint64_t w = 1;
  while (gp->log_r(w) < supQ) ++w;  // terminates: log_r increases to supP > supQ
  return Verdict::fails_exact(
      "power-grid", depth,
      "level " + std::to_string(w) + " has radius at least the whole target supremum " +
          fmt_ld(supQ) + " (log); the weight ratio escapes along the unbounded exponent",
      {{"witness_level", w},
       {"source_sup_log_r", static_cast<double>(supP)},
       {"target_sup_log_r", static_cast<double>(supQ)}});
}

// Is Q the pointwise square of P?
bool same_family(const WeightFamily& A, const WeightFamily& B) {
  if (!(A.index_set() == B.index_set())) return false;
  if (A.builtin() && B.builtin() && A.builtin()->id == B.builtin()->id) return true;
  if (A.symbolic_expr() && B.symbolic_expr())
    return dsl::structurally_equal(A.symbolic_expr(), B.symbolic_expr());
  if (A.level_count() && B.level_count() && *A.level_count() == *B.level_count() &&
      *A.level_count() <= 64) {
    for (std::uint64_t k = 1; k <= *A.level_count(); ++k) {
      ExprPtr a = A.level_expr(k);
      ExprPtr b = B.level_expr(k);
      if (!a || !b || !dsl::structurally_equal(a, b)) return false;
    }
    return true;
  }
  return false;
}

bool is_square_of(const WeightFamily& Q, const WeightFamily& P) {
  if (Q.derived() == WeightFamily::Derived::square_of && Q.parent(0) &&
      same_family(*Q.parent(0), P))
    return true;
  if (P.symbolic_expr() && Q.symbolic_expr())
    return dsl::structurally_equal(
        Q.symbolic_expr(), Expr::node(Op::mul, {P.symbolic_expr(), P.symbolic_expr()}));
  return false;
}

std::vector<LevelCert> identity_certs(std::uint64_t levels, const char* rule,
                                      std::uint64_t depth) {
  std::vector<LevelCert> certs;
  for (std::uint64_t k = 1; k <= levels; ++k) certs.push_back({k, k, 0.0L, rule, depth});
  return certs;
}

// e <= 0 over i,j >= 1 and every k >= 1: either syntactically, or affine in
// k with a nonpositive slope and a nonpositive value at k = 1.
bool nonpos_all_k(const ExprPtr& e) {
  if (canon::structurally_nonpos(e)) return true;
  auto aff = canon::affine_in_k(e);
  if (!aff) return false;
  if (!aff->slope) return canon::structurally_nonpos(aff->constant);
  if (!canon::structurally_nonpos(aff->slope)) return false;
  return canon::structurally_nonpos(canon::make_sum({aff->constant, aff->slope}));
}

struct MapCand {
  std::string desc;
  ExprPtr mapped;  // target level expression with k replaced by the map
  std::uint64_t scale = 0, shift = 0, constant = 0;
  std::uint64_t at(std::uint64_t k) const {
    if (constant) return constant;
    return scale * k + shift;
  }
};

std::optional<Verdict> uniform_map_rule(const WeightFamily& P, const WeightFamily& Q,
                                        std::uint64_t depth, std::uint64_t level_budget) {
  ExprPtr ep = P.symbolic_expr();
  if (!ep || P.level_count()) return std::nullopt;

  std::vector<MapCand> cands;
  if (Q.symbolic_expr() && !Q.level_count()) {
    for (std::uint64_t c = 1; c <= 4; ++c) {
      ExprPtr map = c == 1 ? Expr::variable(Var::k)
                           : Expr::node(Op::mul, {Expr::num(static_cast<long double>(c)),
                                                  Expr::variable(Var::k)});
      cands.push_back({c == 1 ? "k" : std::to_string(c) + "k",
                       dsl::substitute(Q.symbolic_expr(), Var::k, map), c, 0, 0});
    }
    for (std::uint64_t t = 1; t <= level_budget; ++t) {
      ExprPtr map = Expr::node(
          Op::add, {Expr::variable(Var::k), Expr::num(static_cast<long double>(t))});
      cands.push_back({"k+" + std::to_string(t),
                       dsl::substitute(Q.symbolic_expr(), Var::k, map), 1, t, 0});
    }
  }
  for (std::uint64_t m0 = 1; m0 <= std::min<std::uint64_t>(4, Q.capped_level_count(4)); ++m0)
    if (ExprPtr eq = Q.level_expr(m0))
      cands.push_back({std::to_string(m0), eq, 0, 0, m0});

  const bool scalar = P.index_set().kind() == IndexSet::Kind::naturals;
  for (const MapCand& cand : cands) {
    canon::Product pr = canon::ratio(ep, cand.mapped);
    if (!pr.ok) continue;
    const long double logC = std::isfinite(pr.log_const) ? pr.log_const : 0.0L;

    auto win = [&](const std::string& rule, long double lc,
                   const std::string& note) -> Verdict {
      std::vector<LevelCert> certs;
      for (std::uint64_t k = 1; k <= level_budget; ++k)
        certs.push_back({k, cand.at(k), lc, rule, depth});
      return Verdict::holds_exact(rule, depth, note,
                                  {{"levels", level_certs_json(certs)},
                                   {"uniform", true},
                                   {"map", cand.desc},
                                   {"logC", static_cast<double>(lc)}});
    };

    if (pr.factors.empty())
      return win("exact-level-map", logC,
                 "the weight ratio against target level " + cand.desc +
                     " cancels to the constant exp(" + fmt_ld(logC) + ")");

    if (pr.level_free() && scalar) {
      ExprPtr r = pr.to_expr();
      auto mono = growth::analyze(r, Var::i, {});
      if (mono) {
        auto lim = growth::limit_at_infinity(*mono);
        if (lim.kind != growth::LimitKind::infinite) {
          const std::uint64_t N = 4096;
          LogValue best = LogValue::zero();
          bool eval_ok = true;
          for (std::uint64_t v = 1; v <= N && eval_ok; ++v) {
            dsl::Bindings b;
            b.i = static_cast<long double>(v);
            try {
              best = LogValue::max(best, r->eval(b));
            } catch (const dsl::EvalError&) {
              eval_ok = false;
            }
          }
          std::string rule;
          auto term = [&](std::uint64_t v) {
            dsl::Bindings b;
            b.i = static_cast<long double>(v);
            return r->eval(b);
          };
          std::optional<LogValue> bound;
          if (eval_ok) bound = growth::tail_sup_bound(*mono, term, N, &rule);
          if (bound)
            return win("level-free-ratio", LogValue::max(best, *bound).log(),
                       "the level variable cancels against target level " + cand.desc +
                           "; the remaining index ratio is bounded (" + rule + ")");
        }
      }
    }

    bool bounded = true;
    for (const canon::Factor& f : pr.factors) {
      if (!nonpos_all_k(f.exponent)) {
        bounded = false;
        break;
      }
      if (f.base && !canon::structurally_ge_one(f.base)) {
        bounded = false;
        break;
      }
    }
    if (bounded) {
      std::string rule = cand.shift > 0 ? "uniform-shift" : "bounded-ratio";
      return win(rule, logC,
                 "every ratio factor against target level " + cand.desc +
                     " has a base at least 1 raised to a nonpositive exponent");
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Per-level certification sweep.

struct PerLevel {
  std::vector<LevelCert> certs;
  bool all_certified = true;
  std::optional<std::uint64_t> fail_level;
  nlohmann::json fail_divergence = nlohmann::json::array();
  nlohmann::json trend = nlohmann::json::array();
};

PerLevel per_level_pass(const WeightFamily& P, const WeightFamily& Q, std::uint64_t depth,
                        std::uint64_t level_budget) {
  PerLevel res;
  const std::uint64_t K_src = P.capped_level_count(level_budget);
  const std::uint64_t K_tgt = Q.capped_level_count(level_budget);
  const bool tgt_complete = Q.level_count() && *Q.level_count() <= K_tgt;

  for (std::uint64_t k = 1; k <= K_src; ++k) {
    bool certified = false;
    std::uint64_t divergent = 0;
    nlohmann::json divergence = nlohmann::json::array();
    nlohmann::json level_trend = nlohmann::json::array();
    for (std::uint64_t m = 1; m <= K_tgt; ++m) {
      SupScan s = sup_ratio(P, k, Q, m, depth);
      if (s.kind == SupScan::Kind::finite) {
        res.certs.push_back({k, m, s.logC, s.rule, depth});
        certified = true;
        break;
      }
      if (s.kind == SupScan::Kind::infinite) {
        ++divergent;
        divergence.push_back({{"target_level", m}, {"rule", s.rule}});
      } else {
        level_trend.push_back({{"target_level", m},
                               {"prefix_log_sup", static_cast<double>(s.prefix_log_sup)},
                               {"argmax_rank", s.arg},
                               {"scanned", s.scanned}});
      }
    }
    if (certified) continue;
    res.all_certified = false;
    if (divergent == K_tgt && tgt_complete && !res.fail_level) {
      res.fail_level = k;
      res.fail_divergence = divergence;
      break;
    }
    res.trend.push_back({{"source_level", k}, {"targets", level_trend}});
  }
  return res;
}

}  // namespace

// ---------------------------------------------------------------------------

nlohmann::json level_certs_json(const std::vector<LevelCert>& certs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const LevelCert& c : certs)
    arr.push_back({{"source_level", c.source_level},
                   {"target_level", c.target_level},
                   {"logC", static_cast<double>(c.logC)},
                   {"proof_rule", c.proof_rule},
                   {"depth", c.depth}});
  return arr;
}

std::vector<LevelCert> level_certs_from_json(const nlohmann::json& j) {
  std::vector<LevelCert> certs;
  for (const auto& e : j)
    certs.push_back({e.at("source_level").get<std::uint64_t>(),
                     e.at("target_level").get<std::uint64_t>(),
                     static_cast<long double>(e.at("logC").get<double>()),
                     e.at("proof_rule").get<std::string>(),
                     e.at("depth").get<std::uint64_t>()});
  return certs;
}

std::optional<std::vector<LevelCert>> compose_certificates(
    const std::vector<LevelCert>& pq, const std::vector<LevelCert>& qr) {
  std::vector<LevelCert> out;
  out.reserve(pq.size());
  for (const LevelCert& a : pq) {
    const LevelCert* via = nullptr;
    for (const LevelCert& b : qr)
      if (b.source_level == a.target_level) {
        via = &b;
        break;
      }
    if (!via) return std::nullopt;
    out.push_back({a.source_level, via->target_level, a.logC + via->logC,
                   "composed(" + a.proof_rule + "," + via->proof_rule + ")",
                   std::min(a.depth, via->depth)});
  }
  return out;
}

Verdict dominates(const WeightFamily& P, const WeightFamily& Q, std::uint64_t depth,
                  std::uint64_t level_budget) {
  if (!(P.index_set() == Q.index_set()))
    throw ConfigError("domination needs matching index sets");
  if (depth == 0 || level_budget == 0)
    throw ConfigError("depth and level budget must be positive");

  if (auto v = grid_rule(P, Q, depth, level_budget)) return *v;

  if (P.flags().all_weights_ge_one && is_square_of(Q, P)) {
    std::uint64_t levels = P.capped_level_count(level_budget);
    return Verdict::holds_exact(
        "pointwise-square", depth,
        "weights at least 1 sit below their own squares level by level with C = 1",
        {{"levels", level_certs_json(identity_certs(levels, "pointwise-square", depth))},
         {"uniform", true}});
  }

  PerLevel res = per_level_pass(P, Q, depth, level_budget);
  if (res.fail_level)
    return Verdict::fails_exact(
        "per-level-divergence", depth,
        "source level " + std::to_string(*res.fail_level) +
            " outgrows every target level",
        {{"witness_level", *res.fail_level},
         {"targets_checked", Q.capped_level_count(level_budget)},
         {"divergence", res.fail_divergence}});

  const bool src_complete = P.level_count() && *P.level_count() <= level_budget;
  if (res.all_certified && src_complete)
    return Verdict::holds_exact(
        "finite-level-exhaustion", depth,
        "all " + std::to_string(*P.level_count()) + " source levels certified",
        {{"levels", level_certs_json(res.certs)}, {"uniform", false}});

  if (auto v = uniform_map_rule(P, Q, depth, level_budget)) return *v;

  nlohmann::json evidence{{"certified_levels", level_certs_json(res.certs)},
                          {"trend", res.trend}};
  std::string note = res.all_certified
                         ? "all scanned source levels certified but no uniform rule "
                           "covers the remaining levels"
                         : "some scanned source levels resisted both certification and "
                           "divergence proof";
  return Verdict::unknown_at(depth, note, evidence);
}

Verdict equivalent(const WeightFamily& P, const WeightFamily& Q, std::uint64_t depth,
                   std::uint64_t level_budget) {
  Verdict fwd = dominates(P, Q, depth, level_budget);
  Verdict bwd = dominates(Q, P, depth, level_budget);
  nlohmann::json cert;
  to_json(cert["forward"], fwd);
  to_json(cert["backward"], bwd);
  if (fwd.fails() || bwd.fails()) {
    std::string dir = fwd.fails() ? "forward" : "backward";
    return Verdict::fails_exact("mutual-domination", depth,
                                dir + " domination fails: " +
                                    (fwd.fails() ? fwd.detail : bwd.detail),
                                cert);
  }
  if (fwd.holds() && bwd.holds())
    return Verdict::holds_exact("mutual-domination", depth,
                                "both domination directions certified", cert);
  return Verdict::unknown_at(depth, "at least one domination direction is undetermined",
                             cert);
}

Verdict is_algebra(const WeightFamily& P, std::uint64_t depth, std::uint64_t level_budget) {
  if (P.flags().all_weights_ge_one) {
    std::uint64_t levels = P.capped_level_count(level_budget);
    return Verdict::holds_exact(
        "pointwise-square", depth,
        "weights at least 1 sit below their own squares level by level with C = 1",
        {{"levels", level_certs_json(identity_certs(levels, "pointwise-square", depth))},
         {"uniform", true}});
  }
  if (const auto& g = P.power_grid()) {
    const long double sup = g->sup_log_r();
    if (sup >= 0.0L)
      return Verdict::holds_exact(
          "power-grid", depth,
          "radius supremum at least 1: every level radius is cleared by a later "
          "squared radius",
          {{"source_sup_log_r", static_cast<double>(sup)}});
    std::uint64_t w = 1;
    while (g->log_r(w) < 2.0L * sup) ++w;
    return Verdict::fails_exact(
        "power-grid", depth,
        "radius supremum below 1: level " + std::to_string(w) +
            " already has radius at least the squared-family supremum",
        {{"witness_level", w}, {"source_sup_log_r", static_cast<double>(sup)}});
  }
  return dominates(P, square(P), depth, level_budget);
}

// ---------------------------------------------------------------------------
// Non-algebra witness.

namespace {

// log weight at the renumbered level (1-based from mstar).
long double log_weight_rel(const WeightFamily& P, std::uint64_t mstar, std::uint64_t rel,
                           std::uint64_t i) {
  if (const auto& g = P.power_grid()) {
    dsl::Bindings b;
    b.i = static_cast<long double>(i);
    return g->alpha->eval(b).value() * g->log_r(mstar + rel - 1);
  }
  return P.weight_at_rank(mstar + rel - 1, i).log();
}

}  // namespace

NonAlgebraWitness non_algebra_witness(const WeightFamily& P, std::uint64_t k_max,
                                      std::uint64_t scan_budget, bool force) {
  if (k_max == 0) throw ConfigError("k_max must be positive");

  Verdict alg = is_algebra(P, 4096, 8);
  std::uint64_t mstar = 1;
  if (alg.fails()) {
    if (alg.certificate.contains("witness_level"))
      mstar = alg.certificate["witness_level"].get<std::uint64_t>();
  } else if (!force) {
    throw PreconditionError(alg.holds()
                                ? "is_algebra holds"
                                : "is_algebra is undetermined; pass force to proceed");
  }

  if (P.index_set().kind() == IndexSet::Kind::natural_pairs)
    throw PreconditionError("the witness scan needs a scalar index set");
  if (!P.flags().pointwise_ordered)
    throw PreconditionError("the witness construction needs pointwise ordered levels");
  if (P.level_count() && *P.level_count() < mstar + k_max - 1)
    throw ConfigError("k_max reaches past the available levels");
  const std::optional<std::uint64_t> max_index = P.index_set().count();

  const auto& grid = P.power_grid();
  const bool alpha_is_index =
      grid && grid->alpha->op == Op::var && grid->alpha->var == Var::i;

  auto lw = [&](std::uint64_t rel, std::uint64_t i) {
    return log_weight_rel(P, mstar, rel, i);
  };

  std::vector<std::uint64_t> idxs;
  idxs.reserve(k_max);
  std::uint64_t prev = 0;
  std::uint64_t evals = 0;
  auto spend = [&](std::uint64_t n, std::uint64_t k) {
    evals += n;
    if (evals > scan_budget)
      throw PreconditionError("no index satisfying the block inequality within the scan "
                              "budget at block " +
                              std::to_string(k) + " (failing level " +
                              std::to_string(mstar) + ")");
  };

  for (std::uint64_t k = 1; k <= k_max; ++k) {
    const long double target = 4.0L * std::log(static_cast<long double>(k));
    std::uint64_t found = 0;

    if (grid) {
      const long double coeff = grid->log_r(mstar) - 2.0L * grid->log_r(mstar + k - 1);
      if (coeff <= 0.0L)
        throw PreconditionError(
            "no index can satisfy the block inequality at block " + std::to_string(k) +
            " (failing level " + std::to_string(mstar) + " has no radius slack)");
      auto alpha_clears = [&](std::uint64_t i) {
        if (alpha_is_index) return static_cast<long double>(i) * coeff > target;
        dsl::Bindings b;
        b.i = static_cast<long double>(i);
        return grid->alpha->eval(b).value() * coeff > target;
      };
      std::uint64_t cand;
      if (alpha_is_index) {
        long double bound = target / coeff;
        cand = bound < 1.0L ? 1 : static_cast<std::uint64_t>(bound) + 1;
        if (cand <= prev) cand = prev + 1;
        while (cand > prev + 1 && alpha_clears(cand - 1)) --cand;
        while (!alpha_clears(cand)) ++cand;
        spend(4, k);
      } else {
        // alpha is nondecreasing: double then bisect
        std::uint64_t lo = prev + 1, hi = prev + 1;
        spend(2, k);
        while (!alpha_clears(hi)) {
          lo = hi + 1;
          hi *= 2;
          spend(1, k);
          if (hi > (1ULL << 50))
            throw PreconditionError("no index satisfying the block inequality within "
                                    "the scan budget at block " +
                                    std::to_string(k) + " (failing level " +
                                    std::to_string(mstar) + ")");
        }
        while (lo < hi) {
          std::uint64_t mid = lo + (hi - lo) / 2;
          spend(1, k);
          if (alpha_clears(mid))
            hi = mid;
          else
            lo = mid + 1;
        }
        cand = std::max(lo, prev + 1);
      }
      // settle float boundary against the actual weights
      std::uint64_t tries = 0;
      while (!(lw(1, cand) > target + 2.0L * lw(k, cand))) {
        if (++tries > 8)
          throw InternalError("grid witness prediction failed to verify at block " +
                              std::to_string(k));
        ++cand;
      }
      found = cand;
    } else {
      for (std::uint64_t i = prev + 1;; ++i) {
        if (max_index && i > *max_index)
          throw PreconditionError("index set exhausted at block " + std::to_string(k) +
                                  " (failing level " + std::to_string(mstar) + ")");
        spend(2, k);
        if (lw(1, i) > target + 2.0L * lw(k, i)) {
          found = i;
          break;
        }
      }
    }
    idxs.push_back(found);
    prev = found;
  }

  NonAlgebraWitness out;
  out.failing_level = mstar;
  out.indices = idxs;
  out.x = SeqElement::zero(idxs.back());
  std::vector<long double> logx(k_max);
  for (std::uint64_t k = 1; k <= k_max; ++k) {
    logx[k - 1] = -2.0L * std::log(static_cast<long double>(k)) - lw(k, idxs[k - 1]);
    out.x.set(idxs[k - 1], Coeff{LogValue::from_log(logx[k - 1]), 0.0});
  }

  LogValue sq = LogValue::zero();
  for (std::uint64_t k = 1; k <= k_max; ++k)
    sq = sq + LogValue::from_log(2.0L * logx[k - 1] + lw(1, idxs[k - 1]));
  out.square_partial = sq;

  const std::uint64_t Lmax = std::min<std::uint64_t>(k_max, 8);
  for (std::uint64_t l = 1; l <= Lmax; ++l) {
    LogValue s = LogValue::zero();
    for (std::uint64_t k = l; k <= k_max; ++k)
      s = s + LogValue::from_log(logx[k - 1] + lw(l, idxs[k - 1]));
    out.level_partials.push_back(s);
  }
  return out;
}

}  // namespace koethe
