#include "koethe/approx.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <unordered_set>
#include <utility>

#include "koethe/errors.hpp"
#include "koethe/growth.hpp"

namespace koethe {

namespace {

using dsl::Expr;
using dsl::ExprPtr;
using dsl::Op;
using dsl::Var;

std::string fmt_ld(long double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12Le", v);
  return buf;
}

// Certified bound on sum_{i > from} |a_i| p^(k)_i, or nothing.
std::optional<LogValue> element_tail_sum(const SeqElement& a, const WeightFamily& P,
                                         std::uint64_t k, std::uint64_t from) {
  if (!a.tail_rule()) return LogValue::zero();
  ExprPtr ep = P.level_expr(k);
  if (!ep) return std::nullopt;
  auto mono = growth::analyze(Expr::node(Op::mul, {a.tail_rule(), ep}), Var::i, {});
  if (!mono) return std::nullopt;
  ExprPtr rule = a.tail_rule();
  const WeightFamily* fam = &P;
  growth::TermFn fn = [rule, fam, k](std::uint64_t v) {
    dsl::Bindings b;
    b.i = static_cast<long double>(v);
    return rule->eval(b) * fam->weight_at_rank(k, v);
  };
  return growth::tail_sum_bound(*mono, fn, from, nullptr);
}

// Certified bound on sup_{i > from} |a_i| p^(k)_i * extra(i), where extra
// is a further expression factor (pass null for none).
std::optional<LogValue> element_tail_sup(const SeqElement& a, const WeightFamily& P,
                                         std::uint64_t k, const ExprPtr& extra,
                                         std::uint64_t from) {
  if (!a.tail_rule()) return LogValue::zero();
  ExprPtr ep = P.level_expr(k);
  if (!ep) return std::nullopt;
  ExprPtr term = Expr::node(Op::mul, {a.tail_rule(), ep});
  if (extra) term = Expr::node(Op::mul, {term, extra});
  auto mono = growth::analyze(term, Var::i, {});
  if (!mono) return std::nullopt;
  ExprPtr rule = a.tail_rule();
  const WeightFamily* fam = &P;
  growth::TermFn fn = [rule, fam, k, extra](std::uint64_t v) {
    dsl::Bindings b;
    b.i = static_cast<long double>(v);
    LogValue t = rule->eval(b) * fam->weight_at_rank(k, v);
    if (extra) t = t * extra->eval(b);
    return t;
  };
  return growth::tail_sup_bound(*mono, fn, from, nullptr);
}

// a with the coefficients on J_n removed; the tail rule rides along.
SeqElement residual(const SeqElement& a, const ApproxIdentityStep& st) {
  std::unordered_set<std::uint64_t> J(st.J_prime.begin(), st.J_prime.end());
  J.insert(st.J_double_prime.begin(), st.J_double_prime.end());
  if (a.tail_rule())
    for (std::uint64_t r : J)
      if (r > a.truncation())
        throw PreconditionError(
            "the element's truncation is shorter than the step's index set");
  SeqElement r = SeqElement::zero(a.truncation());
  for (const auto& [rank, c] : a.support())
    if (!J.count(rank)) r.set(rank, c);
  if (a.tail_rule()) r.set_tail_rule(a.tail_rule());
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Multiplier net construction

ApproxIdentityStep build_un(const SeqElement& a, const WeightFamily& P,
                            std::uint64_t p_level, std::uint64_t n,
                            std::uint64_t depth,
                            std::optional<std::uint64_t> q_override) {
  if (n == 0) throw ConfigError("step index n must be positive");
  if (depth == 0) throw ConfigError("depth must be positive");
  if (p_level == 0) throw ConfigError("levels are 1-based");
  if (P.level_count() && p_level > *P.level_count())
    throw ConfigError("base level beyond the family's level list");
  if (P.index_set().kind() != IndexSet::Kind::naturals)
    throw PreconditionError("multiplier nets are built over the scalar index");

  // Pick the q level: smallest >= p_level whose weights certifiably tend
  // to infinity, so {i in I' : q_i <= n} is finite and fully scanned.
  std::uint64_t q = 0;
  std::optional<growth::Monotone> q_inc;
  auto q_candidate = [&](std::uint64_t c) -> bool {
    ExprPtr ep = P.level_expr(c);
    if (!ep) return false;
    auto mono = growth::analyze(ep, Var::i, {});
    if (!mono) return false;
    if (growth::limit_at_infinity(*mono).kind != growth::LimitKind::infinite)
      return false;
    q_inc = growth::eventually_increasing(*mono);
    return true;
  };
  if (q_override) {
    q = *q_override;
    if (q < p_level) throw ConfigError("the q level must be at least the base level");
    if (P.level_count() && q > *P.level_count())
      throw ConfigError("q level beyond the family's level list");
    if (!q_candidate(q))
      throw PreconditionError("the requested q level's weights do not certifiably "
                              "tend to infinity");
  } else {
    const std::uint64_t hi = P.capped_level_count(p_level + 8);
    for (std::uint64_t c = p_level; c <= hi && q == 0; ++c)
      if (q_candidate(c)) q = c;
    if (q == 0)
      throw PreconditionError("no level at or above the base level certifiably tends "
                              "to infinity; pass an explicit q level");
  }
  if (q > p_level && !P.flags().pointwise_ordered)
    throw PreconditionError("capturing through a higher level needs pointwise-ordered "
                            "weights");
  // Completeness of J': beyond the scan the q weights must already exceed n.
  if (!q_inc || q_inc->from > static_cast<long double>(depth) ||
      !(P.weight_at_rank(q, depth + 1) > LogValue::from_value(static_cast<long double>(n))))
    throw PreconditionError("cannot certify that the q weights exceed n beyond the "
                            "scan depth; raise the depth");

  ApproxIdentityStep st;
  st.n = n;
  st.p_level = p_level;
  st.q_level = q;
  st.u = SeqElement::zero(depth);

  const LogValue one = LogValue::one();
  const LogValue n_val = LogValue::from_value(static_cast<long double>(n));
  std::vector<std::uint64_t> dp_ranks;  // I'' in enumeration order
  std::vector<LogValue> dp_mass;        // |a_i| p_i on I''
  for (std::uint64_t i = 1; i <= depth; ++i) {
    LogValue p = P.weight_at_rank(p_level, i);
    if (p > one) {
      if (!(P.weight_at_rank(q, i) > n_val)) st.J_prime.push_back(i);
    } else {
      dp_ranks.push_back(i);
      dp_mass.push_back(a.abs_at(i) * p);
    }
  }

  // Minimal prefix of I'' whose excluded mass (rest of the scan plus the
  // certified beyond-depth tail) stays under 1/n^2.
  auto beyond = element_tail_sum(a, P, p_level, depth);
  if (!beyond)
    throw PreconditionError("cannot bound the tail mass beyond the scan depth");
  const LogValue target =
      LogValue::from_value(1.0L / (static_cast<long double>(n) * static_cast<long double>(n)));
  std::vector<LogValue> suffix(dp_ranks.size() + 1, LogValue::zero());
  for (std::size_t t = dp_ranks.size(); t-- > 0;)
    suffix[t] = suffix[t + 1] + dp_mass[t];
  std::size_t L = dp_ranks.size() + 1;
  for (std::size_t t = 0; t <= dp_ranks.size(); ++t)
    if (suffix[t] + *beyond < target) {
      L = t;
      break;
    }
  if (L > dp_ranks.size())
    throw PreconditionError("the tail mass cannot be brought under the step target "
                            "at this depth");
  st.J_double_prime.assign(dp_ranks.begin(), dp_ranks.begin() + static_cast<std::ptrdiff_t>(L));

  for (std::uint64_t r : st.J_prime) st.u.set(r, Coeff{LogValue::one(), 0.0});
  for (std::uint64_t r : st.J_double_prime) st.u.set(r, Coeff{LogValue::one(), 0.0});
  return st;
}

// ---------------------------------------------------------------------------
// Convergence measurement

ConvergenceReport verify_convergence(const SeqElement& a, const WeightFamily& P,
                                     std::uint64_t p_level,
                                     const std::vector<ApproxIdentityStep>& steps,
                                     long double epsilon) {
  if (steps.empty()) throw ConfigError("no steps supplied");
  ConvergenceReport rep;
  rep.p_level = p_level;
  rep.q_level = steps.front().q_level;
  rep.grace_window = 10;

  std::uint64_t prev_n = 0;
  for (const ApproxIdentityStep& st : steps) {
    if (st.p_level != p_level)
      throw PreconditionError("a step was built at a different base level");
    if (st.q_level != rep.q_level)
      throw ConfigError("steps mix different q levels");
    if (st.n <= prev_n) throw ConfigError("steps must have strictly increasing n");
    prev_n = st.n;

    SeqElement r = residual(a, st);
    SeminormValue sv = seminorm_sup(r, P, p_level);
    if (sv.status != SeminormStatus::converged)
      throw PreconditionError("the residual sup at step " + std::to_string(st.n) +
                              " is not certifiable");

    ConvergenceRow row;
    row.n = st.n;
    row.value = static_cast<long double>(st.n) * sv.total().value();
    row.branch_bound_Ipp = 1.0L / static_cast<long double>(st.n);

    // sup over I' \ J'_n of |a_i| q_i^2, scan plus certified tail.
    const std::uint64_t scan = st.u.truncation();
    const LogValue one = LogValue::one();
    const LogValue n_val = LogValue::from_value(static_cast<long double>(st.n));
    LogValue best = LogValue::zero();
    for (std::uint64_t i = 1; i <= scan; ++i) {
      LogValue p = P.weight_at_rank(p_level, i);
      if (!(p > one)) continue;
      LogValue qv = P.weight_at_rank(st.q_level, i);
      if (!(qv > n_val)) continue;
      best = LogValue::max(best, a.abs_at(i) * qv * qv);
    }
    if (a.tail_rule()) {
      ExprPtr qe = P.level_expr(st.q_level);
      auto tail = qe ? element_tail_sup(a, P, st.q_level, qe, scan) : std::nullopt;
      if (!tail)
        throw PreconditionError("cannot bound |a| q^2 beyond the scan depth");
      best = LogValue::max(best, *tail);
    }
    row.branch_bound_Ip = best.value();
    rep.rows.push_back(row);
  }

  rep.below_epsilon_at_end = rep.rows.back().value <= epsilon;
  rep.monotone_after_grace = true;
  for (std::size_t t = 0; t + 1 < rep.rows.size(); ++t)
    if (rep.rows[t].n >= rep.grace_window &&
        rep.rows[t + 1].value > rep.rows[t].value)
      rep.monotone_after_grace = false;
  rep.note = rep.below_epsilon_at_end
                 ? "the scaled residual is below epsilon at the final step"
                 : "the scaled residual has not yet reached epsilon";
  return rep;
}

nlohmann::json ConvergenceReport::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const ConvergenceRow& r : rows)
    rows_j.push_back({{"n", r.n},
                      {"value", static_cast<double>(r.value)},
                      {"branch_bound_Ipp", static_cast<double>(r.branch_bound_Ipp)},
                      {"branch_bound_Ip", static_cast<double>(r.branch_bound_Ip)}});
  return {{"p_level", p_level},
          {"q_level", q_level},
          {"rows", rows_j},
          {"below_epsilon_at_end", below_epsilon_at_end},
          {"monotone_after_grace", monotone_after_grace},
          {"grace_window", grace_window},
          {"note", note}};
}

std::string ConvergenceReport::to_csv() const {
  std::string out = "n,value,branch_bound_Ipp,branch_bound_Ip\n";
  for (const ConvergenceRow& r : rows) {
    out += std::to_string(r.n);
    out += ',';
    out += fmt_ld(r.value);
    out += ',';
    out += fmt_ld(r.branch_bound_Ipp);
    out += ',';
    out += fmt_ld(r.branch_bound_Ip);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Multiplier-net sanity battery

LawsonReadReport verify_lawson_read(const std::vector<SeqElement>& A_sample,
                                    const WeightFamily& P,
                                    const std::vector<ApproxIdentityStep>& steps,
                                    std::uint64_t depth) {
  if (steps.empty()) throw ConfigError("no steps supplied");
  if (A_sample.empty()) throw ConfigError("no sample elements supplied");
  if (depth == 0) throw ConfigError("depth must be positive");

  LawsonReadReport rep;
  rep.cond_iii_exact = true;
  rep.cond_iv_exact = true;

  for (const ApproxIdentityStep& st : steps) {
    // (iii) 2u - u^2 == u, computed in the value domain on u's support.
    SeqElement uu = pointwise_mul(st.u, st.u);
    SeqElement w = SeqElement::zero(st.u.truncation());
    for (const auto& [rank, c] : st.u.support()) {
      long double m = c.magnitude.value();
      long double mm = uu.at(rank).magnitude.value();
      w.set(rank, Coeff{LogValue::from_value(2.0L * m - mm), c.phase});
    }
    rep.cond_iii_exact = rep.cond_iii_exact && w.same_support_and_values(st.u);

    LogValue u_norm = seminorm_l1(st.u, P, st.p_level).total();
    for (std::size_t s = 0; s < A_sample.size(); ++s) {
      const SeqElement& a = A_sample[s];
      // (iv) a u == u a bitwise
      SeqElement au = pointwise_mul(a, st.u);
      SeqElement ua = pointwise_mul(st.u, a);
      rep.cond_iv_exact = rep.cond_iv_exact && au.same_support_and_values(ua);

      SeqElement r = residual(a, st);
      SeminormValue rv = seminorm_l1(r, P, st.p_level);
      LogValue vi = rv.status == SeminormStatus::converged ? rv.total() : rv.partial;

      LawsonReadRow row;
      row.n = st.n;
      row.sample = s;
      row.value_i = vi.value();
      row.value_ii = (vi * u_norm).value();
      rep.rows.push_back(row);
    }
  }

  const std::uint64_t last_n = steps.back().n;
  for (const LawsonReadRow& r : rep.rows)
    if (r.n == last_n) {
      rep.final_max_i = std::max(rep.final_max_i, r.value_i);
      rep.final_max_ii = std::max(rep.final_max_ii, r.value_ii);
    }
  return rep;
}

nlohmann::json LawsonReadReport::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const LawsonReadRow& r : rows)
    rows_j.push_back({{"n", r.n},
                      {"sample", r.sample},
                      {"value_i", static_cast<double>(r.value_i)},
                      {"value_ii", static_cast<double>(r.value_ii)}});
  return {{"rows", rows_j},
          {"cond_iii_exact", cond_iii_exact},
          {"cond_iv_exact", cond_iv_exact},
          {"final_max_i", static_cast<double>(final_max_i)},
          {"final_max_ii", static_cast<double>(final_max_ii)}};
}

// ---------------------------------------------------------------------------
// Square factorization

SeqElement square_decompose(const SeqElement& a) {
  SeqElement b = SeqElement::zero(a.truncation());
  for (const auto& [rank, c] : a.support())
    b.set(rank, Coeff{c.magnitude.pow(0.5L), c.phase / 2.0});
  if (a.tail_rule())
    b.set_tail_rule(Expr::node(Op::pow, {a.tail_rule(), Expr::num(0.5L)}));
  return b;
}

Verdict sqrt_membership(const SeqElement& a, const WeightFamily& P, std::uint64_t depth,
                        std::uint64_t level_budget) {
  return membership(square_decompose(a), P, depth, level_budget);
}

// ---------------------------------------------------------------------------
// Idempotence battery

IdempotenceReport idempotence_profile(const WeightFamily& P, std::uint64_t depth,
                                      std::uint64_t level_budget, std::uint64_t seed,
                                      std::size_t sample_count) {
  if (depth == 0 || level_budget == 0)
    throw ConfigError("depth and level budget must be positive");

  IdempotenceReport rep;
  rep.nuclearity = check_N(P, depth, level_budget);
  try {
    rep.log_criterion = check_log_criterion(P, depth, level_budget);
  } catch (const PreconditionError& e) {
    rep.log_criterion = Verdict::unknown_at(
        depth, std::string("criterion hypothesis not met: ") + e.what());
  }
  rep.dual_note =
      "the dual-space condition is recorded for reporting only; pairings are "
      "sampled, never decided";

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> shape(0, 2);
  std::uniform_int_distribution<int> small(1, 3);
  std::uniform_int_distribution<int> power(2, 6);
  const std::uint64_t build_n = std::min<std::uint64_t>(depth, 4096);
  bool sample_non_idempotent = false;
  for (std::size_t t = 0; t < sample_count; ++t) {
    std::string text;
    switch (shape(rng)) {
      case 0:
        text = "2^(-" + std::to_string(small(rng)) + "*i)";
        break;
      case 1:
        text = "i^(-" + std::to_string(power(rng)) + ")";
        break;
      default:
        text = "(i+" + std::to_string(small(rng)) + ")^(-" +
               std::to_string(power(rng)) + ")";
        break;
    }
    SeqElement x =
        SeqElement::from_abs_expr(dsl::parse(text), P.index_set(), build_n, true);
    IdempotenceSample smp;
    smp.description = text;
    smp.in_space = membership(x, P, depth, level_budget);
    smp.sqrt_in_space = sqrt_membership(x, P, depth, level_budget);
    if (smp.in_space.holds() && smp.in_space.exact() && smp.sqrt_in_space.fails() &&
        smp.sqrt_in_space.exact())
      sample_non_idempotent = true;
    rep.samples.push_back(std::move(smp));
  }

  // Internal consistency of the battery: on pointwise-ordered families
  // with weights >= 1 over the scalar index whose square presentation is
  // certified equivalent, the nuclearity verdict, the log-ratio criterion
  // and the sampled square roots must point the same way.
  const bool battery_class = P.index_set().kind() == IndexSet::Kind::naturals &&
                             P.flags().all_weights_ge_one &&
                             P.flags().pointwise_ordered;
  const bool nuc_decided = rep.nuclearity.exact() && !rep.nuclearity.unknown();
  const bool log_decided = rep.log_criterion.exact() && !rep.log_criterion.unknown();
  const bool disagree =
      (nuc_decided && log_decided &&
       rep.nuclearity.outcome != rep.log_criterion.outcome) ||
      (sample_non_idempotent &&
       ((nuc_decided && rep.nuclearity.holds()) ||
        (log_decided && rep.log_criterion.holds())));
  if (battery_class && disagree) {
    Verdict b = check_B(P, depth, level_budget);
    if (b.holds() && b.exact())
      throw InternalError("the idempotence battery contradicts itself on a family "
                          "inside its hypothesis class");
  }
  return rep;
}

nlohmann::json IdempotenceReport::to_json() const {
  nlohmann::json samples_j = nlohmann::json::array();
  for (const IdempotenceSample& s : samples) {
    nlohmann::json in_j, sq_j;
    ::koethe::to_json(in_j, s.in_space);
    ::koethe::to_json(sq_j, s.sqrt_in_space);
    samples_j.push_back(
        {{"description", s.description}, {"in_space", in_j}, {"sqrt_in_space", sq_j}});
  }
  nlohmann::json nuc_j, log_j;
  ::koethe::to_json(nuc_j, nuclearity);
  ::koethe::to_json(log_j, log_criterion);
  return {{"nuclearity", nuc_j},
          {"log_criterion", log_j},
          {"samples", samples_j},
          {"dual_note", dual_note}};
}

// ---------------------------------------------------------------------------
// Non-idempotence witness

NonIdempotentWitness non_idempotent_witness(const WeightFamily& P, std::uint64_t depth,
                                            std::uint64_t level_budget) {
  if (depth == 0 || level_budget == 0)
    throw ConfigError("depth and level budget must be positive");
  if (P.index_set().kind() != IndexSet::Kind::naturals)
    throw PreconditionError("the block witness is built over the scalar index");
  if (!P.flags().pointwise_ordered ||
      P.flags().monotone_in_index != IndexMonotonicity::nondecreasing)
    throw PreconditionError("the block witness needs pointwise-ordered weights that "
                            "are nondecreasing in the index");
  // The construction is only meaningful when the log-ratio criterion is
  // refuted at every level; otherwise every element splits and no witness
  // exists.
  Verdict crit = check_log_criterion(P, depth, level_budget);
  if (crit.holds())
    throw PreconditionError("the log-ratio criterion holds on this family, so no "
                            "block witness exists");
  if (!crit.fails())
    throw PreconditionError("the log-ratio criterion could not be refuted at every "
                            "level; the block construction needs that refutation");

  // Block ends: k_n minimal with p^(n)_{k_n} <= k_n^{1/n} and k_n >= 2 k_{n-1}.
  std::vector<std::uint64_t> ends;
  std::uint64_t prev = 0;
  const std::uint64_t max_blocks =
      P.level_count() ? std::min<std::uint64_t>(*P.level_count(), 64) : 64;
  for (std::uint64_t n = 1; n <= max_blocks; ++n) {
    std::uint64_t found = 0;
    for (std::uint64_t k = std::max<std::uint64_t>(2 * prev, prev + 1); k <= depth; ++k) {
      long double ceiling = std::log(static_cast<long double>(k)) /
                            static_cast<long double>(n);
      if (P.weight_at_rank(n, k).log() <= ceiling) {
        found = k;
        break;
      }
    }
    if (found == 0) break;
    ends.push_back(found);
    prev = found;
  }
  if (ends.empty())
    throw PreconditionError("no block end satisfies the weight ceiling within the "
                            "scan depth; the log-ratio criterion likely holds here");

  NonIdempotentWitness wit;
  wit.block_ends = ends;
  wit.a = SeqElement::zero(ends.back());
  std::uint64_t lo = 0;
  for (std::size_t b = 0; b < ends.size(); ++b) {
    const std::uint64_t hi = ends[b];
    const long double log_k = std::log(static_cast<long double>(hi));
    const std::uint64_t len = hi - lo;
    if (len * 2 < hi)
      throw InternalError("block construction violated the doubling rule");
    // per-block fourth-root mass: len * k^{-3/4} >= 1/2 by the doubling rule
    long double partial =
        static_cast<long double>(len) * std::exp(-0.75L * log_k);
    if (partial < 0.45L)
      throw InternalError("a block's fourth-root mass fell under the analytic floor");
    wit.fourth_root_partials.push_back(partial);
    for (std::uint64_t m = lo + 1; m <= hi; ++m)
      wit.a.set(m, Coeff{LogValue::from_log(-3.0L * log_k), 0.0});
    lo = hi;
  }

  // Per level: the computed prefix mass, and the analytic remainder chain
  // (each later block n contributes at most k_n^{1/n - 2} <= 2^{-(n-B)}/k_B,
  // so the blocks beyond the prefix sum to at most 1/k_B).
  const std::uint64_t K =
      std::min<std::uint64_t>(P.capped_level_count(level_budget), ends.size());
  for (std::uint64_t lev = 1; lev <= K; ++lev) {
    LogValue s = LogValue::zero();
    for (const auto& [rank, c] : wit.a.support())
      s = s + c.magnitude * P.weight_at_rank(lev, rank);
    wit.level_partials.push_back(s);
    wit.level_tail_bounds.push_back(
        LogValue::from_value(1.0L / static_cast<long double>(ends.back())));
  }
  return wit;
}

}  // namespace koethe
