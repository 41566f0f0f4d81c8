#include "koethe/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "koethe/canon.hpp"
#include "koethe/errors.hpp"
#include "koethe/growth.hpp"

namespace koethe {

namespace {

using dsl::Expr;
using dsl::ExprPtr;
using dsl::Op;
using dsl::Var;

constexpr long double kInf = std::numeric_limits<long double>::infinity();

std::string fmt_ld(long double v) {
  std::ostringstream os;
  os.precision(12);
  os << static_cast<double>(v);
  return os.str();
}

bool scalar_index(const WeightFamily& P) {
  return P.index_set().kind() != IndexSet::Kind::natural_pairs;
}

bool is_matrix_builtin(const WeightFamily& P) {
  return P.builtin() && P.builtin()->id == "matrix_example";
}

// Does alpha grow at least like a positive power of the index?  Enough
// for exp(c * alpha_i) with c < 0 to be summable by p-series comparison.
bool alpha_outgrows_log(const dsl::ExprPtr& alpha) {
  auto m = growth::analyze(alpha, Var::i, {});
  if (!m || m->zero) return false;
  if (!m->expo.empty()) return m->expo.front().second > 0.0L;
  return m->pow > 0.0L;
}

// ---------------------------------------------------------------------------
// (U)

Verdict check_U_per_level(const WeightFamily& P, std::uint64_t depth,
                          std::uint64_t level_budget) {
  const std::uint64_t K = P.capped_level_count(level_budget);
  const bool complete = P.level_count() && *P.level_count() <= K;
  nlohmann::json levels = nlohmann::json::array();
  bool all_converge = true;
  for (std::uint64_t k = 1; k <= K; ++k) {
    ExprPtr ep = P.level_expr(k);
    std::optional<growth::Monomial> mono;
    if (ep && scalar_index(P)) mono = growth::analyze(ep, Var::i, {});
    if (!mono) {
      all_converge = false;
      levels.push_back({{"level", k}, {"series", "unknown"}});
      continue;
    }
    growth::Series s = growth::series(*mono);
    if (s.kind == growth::SeriesKind::diverges)
      return Verdict::fails_exact("per-level-series", depth,
                                  "level " + std::to_string(k) + " is not summable (" +
                                      s.rule + ")",
                                  {{"witness_level", k}, {"rule", s.rule}});
    if (s.kind == growth::SeriesKind::converges) {
      levels.push_back({{"level", k}, {"series", "converges"}, {"rule", s.rule}});
    } else {
      all_converge = false;
      levels.push_back({{"level", k}, {"series", "unknown"}});
    }
  }
  if (all_converge && complete)
    return Verdict::holds_exact("per-level-series", depth, "every level is summable",
                                {{"levels", levels}});
  return Verdict::unknown_at(depth,
                             complete ? "some level series resisted classification"
                                      : "only finitely many of infinitely many levels "
                                        "were classified",
                             {{"levels", levels}});
}

// ---------------------------------------------------------------------------
// Splitting-matrix internals.

struct EntryOracle {
  long double inf = kInf;  // certified infimum over all levels, if any
  bool have = false;
};

}  // namespace

Verdict check_U(const WeightFamily& P, std::uint64_t depth, std::uint64_t level_budget) {
  if (depth == 0 || level_budget == 0)
    throw ConfigError("depth and level budget must be positive");

  if (P.index_set().is_finite())
    return Verdict::holds_exact("finite-index", depth,
                                "finite index sets make every level summable",
                                {{"count", *P.index_set().count()}});

  if (P.flags().all_weights_ge_one)
    return Verdict::fails_exact(
        "weights-ge-one", depth,
        "weights at least 1 over an infinite index set can never be summable",
        {{"witness_level", 1}});

  if (const auto& g = P.power_grid(); g && scalar_index(P) && alpha_outgrows_log(g->alpha)) {
    const long double sup = g->sup_log_r();
    if (sup <= 0.0L)
      return Verdict::holds_exact(
          "grid-exp-decay", depth,
          "every level radius stays below 1, so weights decay exponentially in the "
          "exponent and every level is summable",
          {{"sup_log_r", static_cast<double>(sup)}});
    std::uint64_t w = 1;
    while (g->log_r(w) < 0.0L) ++w;
    return Verdict::fails_exact(
        "grid-nondecay", depth,
        "level " + std::to_string(w) + " has radius at least 1; its weights do not "
        "tend to zero",
        {{"witness_level", w}, {"sup_log_r", static_cast<double>(sup)}});
  }

  return check_U_per_level(P, depth, level_budget);
}

// ---------------------------------------------------------------------------
// (N)

namespace {

Verdict check_N_grid(const WeightFamily& P, const PowerGrid& g, std::uint64_t depth) {
  ExprPtr beta = Expr::node(Op::div, {Expr::node(Op::log, {Expr::variable(Var::i)}),
                                      g.alpha});
  auto mono = growth::analyze(beta, Var::i, {});
  if (!mono) return Verdict::unknown_at(depth, "log-to-alpha ratio is not analyzable");
  growth::Limit lim = growth::limit_at_infinity(*mono);

  if (g.infinite_radius) {
    if (lim.kind != growth::LimitKind::infinite)
      return Verdict::holds_exact(
          "grid-nuclearity", depth,
          "with unbounded radii, alpha dominating log(index) gives every level a "
          "summable ratio against a deeper level",
          {{"limit", lim.kind == growth::LimitKind::zero ? "zero" : "positive"},
           {"q_rule", "radius comparison"}});
    return Verdict::fails_exact(
        "grid-log-limit", depth,
        "alpha grows slower than log(index); no level ratio is summable",
        {{"witness_level", 1}});
  }

  if (lim.kind == growth::LimitKind::zero)
    return Verdict::holds_exact(
        "grid-nuclearity", depth,
        "log(index)/alpha tends to zero, so each level's ratio against the next "
        "level is bounded by a summable power",
        {{"limit", "zero"}, {"q_rule", "k+1"}});

  if (lim.kind == growth::LimitKind::infinite)
    return Verdict::fails_exact(
        "grid-log-limit", depth,
        "alpha grows slower than log(index); no level ratio is summable",
        {{"witness_level", 1}});

  // positive limit L with bounded radii: radii slack shrinks below L/2
  nlohmann::json cert{{"limit", "positive"}};
  std::string detail =
      "log(index)/alpha has a positive limit while the radius slack shrinks to "
      "zero; deep levels have no summable ratio";
  if (lim.exact) {
    const long double L = std::exp(lim.log_value);
    const long double sup = g.sup_log_r();
    std::uint64_t w = 1;
    while (sup - g.log_r(w) >= L / 2.0L) ++w;
    cert["witness_level"] = w;
    detail += " (level " + std::to_string(w) + " onward)";
  }
  return Verdict::fails_exact("grid-log-limit", depth, detail, cert);
}

// verify lhs(log p^(k), index) <= log p^(target(k)) on the prefix
void replay_pointwise(const WeightFamily& P, std::uint64_t depth, std::uint64_t levels,
                      const std::function<std::uint64_t(std::uint64_t)>& target,
                      const std::function<long double(long double, const Index&)>& lhs,
                      const char* what) {
  const std::uint64_t N = P.index_set().scan_count(std::min<std::uint64_t>(depth, 2048));
  for (std::uint64_t k = 1; k <= levels; ++k)
    for (std::uint64_t r = 1; r <= N; ++r) {
      Index ix = P.index_set().at(r);
      const long double lhs_v = lhs(P.weight(k, ix).log(), ix);
      const long double rhs_v = P.weight(target(k), ix).log();
      // The analytic bound may hold with equality, so the replay tolerates
      // a few ulps of log-domain rounding.
      const long double slack = 16.0L * std::numeric_limits<long double>::epsilon() *
                                std::max(1.0L, std::fabs(rhs_v));
      if (lhs_v > rhs_v + slack)
        throw InternalError(std::string("curated replay failed for ") + what +
                            " at level " + std::to_string(k) + ", rank " +
                            std::to_string(r));
    }
}

}  // namespace

Verdict check_N(const WeightFamily& P, std::uint64_t depth, std::uint64_t level_budget) {
  if (depth == 0 || level_budget == 0)
    throw ConfigError("depth and level budget must be positive");

  if (P.index_set().is_finite())
    return Verdict::holds_exact("finite-index", depth,
                                "finite index sets make every ratio summable",
                                {{"count", *P.index_set().count()}});

  if (is_matrix_builtin(P)) {
    replay_pointwise(
        P, depth, std::min<std::uint64_t>(level_budget, 8),
        [](std::uint64_t k) { return k + 3; },
        [](long double lp, const Index& ix) {
          return lp + 3.0L * std::log(static_cast<long double>(ix.i + ix.j));
        },
        "the nuclearity bound");
    return Verdict::holds_exact(
        "curated-citation", depth,
        "established analytic fact for this catalog family: three levels up, the "
        "ratio is bounded by (i+j)^-3, which is summable over the pair grid; the "
        "pointwise bound replayed cleanly on the prefix",
        {{"q_rule", "k+3"}, {"summable_majorant", "(i+j)^-3"}});
  }

  if (const auto& g = P.power_grid(); g && scalar_index(P)) {
    Verdict v = check_N_grid(P, *g, depth);
    if (!v.unknown()) return v;
  }

  // uniform shift for symbolic families: a level-free ratio with a
  // convergent series works for every level at once
  if (P.symbolic_expr() && !P.level_count() && scalar_index(P)) {
    for (std::uint64_t t = 1; t <= level_budget; ++t) {
      ExprPtr shifted = dsl::substitute(
          P.symbolic_expr(), Var::k,
          Expr::node(Op::add, {Expr::variable(Var::k),
                               Expr::num(static_cast<long double>(t))}));
      canon::Product pr = canon::ratio(P.symbolic_expr(), shifted);
      if (!pr.ok || !pr.level_free()) continue;
      auto mono = growth::analyze(pr.to_expr(), Var::i, {});
      if (!mono) continue;
      growth::Series s = growth::series(*mono);
      if (s.kind == growth::SeriesKind::converges)
        return Verdict::holds_exact(
            "uniform-shift", depth,
            "the ratio against the level " + std::to_string(t) +
                " steps up is level-free and summable (" + s.rule + ")",
            {{"q_rule", "k+" + std::to_string(t)}, {"series_rule", s.rule}});
    }
  }

  // subpolynomial power families fail against every level
  if (P.symbolic_expr() && P.symbolic_expr()->op == Op::pow && scalar_index(P)) {
    const ExprPtr& base = P.symbolic_expr()->kids[0];
    const ExprPtr& expn = P.symbolic_expr()->kids[1];
    auto mb = growth::analyze(base, Var::i, {});
    auto aff = canon::affine_in_k(expn);
    if (mb && !mb->zero && mb->pow == 0.0L && mb->expo.empty() && aff && aff->slope &&
        canon::structurally_nonneg(aff->slope))
      return Verdict::fails_exact(
          "subpoly-power-family", depth,
          "every level ratio is a negative power of a subpolynomial base, which "
          "decays slower than any summable power",
          {{"witness_level", 1}});
  }

  // per-level search within the family
  const std::uint64_t K = P.capped_level_count(level_budget);
  const bool complete = P.level_count() && *P.level_count() <= K;
  nlohmann::json levels = nlohmann::json::array();
  bool all_certified = true;
  for (std::uint64_t k = 1; k <= K; ++k) {
    ExprPtr ep = P.level_expr(k);
    bool certified = false;
    std::uint64_t divergent = 0;
    for (std::uint64_t m = 1; m <= K && ep && scalar_index(P); ++m) {
      ExprPtr eq = P.level_expr(m);
      if (!eq) break;
      auto mono = growth::analyze(Expr::node(Op::div, {ep, eq}), Var::i, {});
      if (!mono) continue;
      growth::Series s = growth::series(*mono);
      if (s.kind == growth::SeriesKind::converges) {
        levels.push_back({{"level", k}, {"q_level", m}, {"rule", s.rule}});
        certified = true;
        break;
      }
      if (s.kind == growth::SeriesKind::diverges) ++divergent;
    }
    if (certified) continue;
    all_certified = false;
    if (divergent == K && complete)
      return Verdict::fails_exact(
          "finite-level-exhaustion", depth,
          "level " + std::to_string(k) + " has no summable ratio against any level",
          {{"witness_level", k}});
  }
  if (all_certified && complete)
    return Verdict::holds_exact("per-level-series", depth,
                                "every level found a summable ratio partner",
                                {{"levels", levels}});
  return Verdict::unknown_at(depth, "no summability rule covered every level",
                             {{"levels", levels}});
}

// ---------------------------------------------------------------------------
// (B)

Verdict check_B(const WeightFamily& P, std::uint64_t depth, std::uint64_t level_budget) {
  Verdict alg = is_algebra(P, depth, level_budget);
  if (alg.fails())
    throw PreconditionError("the squared-family comparison needs an algebra, but "
                            "is_algebra fails: " +
                            alg.detail);

  if (is_matrix_builtin(P)) {
    replay_pointwise(
        P, depth, std::min<std::uint64_t>(level_budget, 8),
        [](std::uint64_t k) { return 4 * k; },
        [](long double lp, const Index&) { return 2.0L * lp; },
        "the squared-family bound");
    return Verdict::holds_exact(
        "curated-citation", depth,
        "established analytic fact for this catalog family: squares sit below the "
        "level four times up with C = 1, and weights at least 1 give the forward "
        "direction; the pointwise bound replayed cleanly on the prefix",
        {{"backward_map", "4k"}, {"logC", 0.0}});
  }

  return equivalent(P, square(P), depth, level_budget);
}

// ---------------------------------------------------------------------------
// Splitting matrices.

double MMatrices::alpha(std::uint64_t i, std::uint64_t j) const {
  if (i == 0 || j == 0 || i > cap_ || j > cap_)
    throw ConfigError("splitting matrix entry out of range");
  return std::exp(static_cast<double>(alpha_log_[(i - 1) * cap_ + (j - 1)]));
}

double MMatrices::beta(std::uint64_t i, std::uint64_t j) const {
  return 1.0 - alpha(i, j);
}

long double MMatrices::alpha_log(std::uint64_t i, std::uint64_t j) const {
  if (i == 0 || j == 0 || i > cap_ || j > cap_)
    throw ConfigError("splitting matrix entry out of range");
  return alpha_log_[(i - 1) * cap_ + (j - 1)];
}

bool MMatrices::row_identity_exact(std::uint64_t prefix) const {
  prefix = std::min(prefix, cap_);
  for (std::uint64_t i = 1; i <= prefix; ++i)
    for (std::uint64_t j = 1; j <= prefix; ++j) {
      double a = alpha(i, j);
      if (!(a >= 0.0 && a <= 1.0)) return false;
      if (a + (1.0 - a) != 1.0) return false;
    }
  return true;
}

bool MMatrices::column_bound_exact(std::uint64_t level, std::uint64_t prefix,
                                   long double* worst_slack_log) const {
  if (level == 0 || level > level_cap_)
    throw ConfigError("level beyond the certified range of the splitting matrices");
  prefix = std::min(prefix, cap_);
  bool ok = true;
  long double worst = -kInf;
  for (std::uint64_t i = 1; i <= prefix; ++i)
    for (std::uint64_t j = 1; j <= prefix; ++j) {
      long double d = level_logs_[(level - 1) * cap_ + (j - 1)] -
                      level_logs_[(level - 1) * cap_ + (i - 1)];
      long double slack = alpha_log_[(i - 1) * cap_ + (j - 1)] - d;
      worst = std::max(worst, slack);
      if (slack > 0.0L) ok = false;
    }
  if (worst_slack_log) *worst_slack_log = worst;
  return ok;
}

bool MMatrices::transpose_bound_exact(std::uint64_t level, std::uint64_t prefix,
                                      long double* worst_slack_log) const {
  if (level == 0 || level > level_cap_)
    throw ConfigError("level beyond the certified range of the splitting matrices");
  prefix = std::min(prefix, cap_);
  bool ok = true;
  long double worst = -kInf;
  for (std::uint64_t i = 1; i <= prefix; ++i)
    for (std::uint64_t j = 1; j <= prefix; ++j) {
      if (beta(i, j) == 0.0) continue;
      long double d = level_logs_[(level - 1) * cap_ + (j - 1)] -
                      level_logs_[(level - 1) * cap_ + (i - 1)];
      long double slack = std::log1p(-alpha(i, j)) + d;  // need log(beta) <= -d
      worst = std::max(worst, slack);
      if (slack > 0.0L) ok = false;
    }
  if (worst_slack_log) *worst_slack_log = worst;
  return ok;
}

MMatrices construct_M_matrices(const WeightFamily& P, std::uint64_t cap,
                               std::uint64_t level_cap) {
  if (cap == 0 || level_cap == 0)
    throw ConfigError("cap and level_cap must be positive");
  if (!scalar_index(P))
    throw PreconditionError("the splitting construction needs a scalar index set");
  if (P.flags().monotone_in_index == IndexMonotonicity::none)
    throw PreconditionError("the splitting construction needs index-monotone weights");
  if (auto n = P.index_set().count()) cap = std::min(cap, *n);
  const std::uint64_t Klev = P.capped_level_count(level_cap);
  const bool complete = P.level_count() && *P.level_count() <= Klev;
  const auto& grid = P.power_grid();

  MMatrices mm;
  mm.family_ = std::make_shared<const WeightFamily>(P);
  mm.cap_ = cap;
  mm.level_cap_ = Klev;
  mm.alpha_log_.assign(cap * cap, 0.0L);
  mm.level_logs_.assign(Klev * cap, 0.0L);

  // one consistent log table used for both construction and later replays
  std::vector<long double> alpha_vals;
  if (grid) {
    alpha_vals.resize(cap);
    for (std::uint64_t i = 1; i <= cap; ++i) {
      dsl::Bindings b;
      b.i = static_cast<long double>(i);
      alpha_vals[i - 1] = grid->alpha->eval(b).value();
    }
    for (std::uint64_t k = 1; k <= Klev; ++k)
      for (std::uint64_t i = 1; i <= cap; ++i)
        mm.level_logs_[(k - 1) * cap + (i - 1)] = alpha_vals[i - 1] * grid->log_r(k);
  } else {
    for (std::uint64_t k = 1; k <= Klev; ++k)
      for (std::uint64_t i = 1; i <= cap; ++i) {
        LogValue w = P.weight_at_rank(k, i);
        if (w.is_zero())
          throw PreconditionError("zero weight inside the splitting window");
        mm.level_logs_[(k - 1) * cap + (i - 1)] = w.log();
      }
  }

  std::vector<ExprPtr> subs;
  if (!grid && P.symbolic_expr() && !complete) {
    subs.resize(cap);
    for (std::uint64_t i = 1; i <= cap; ++i)
      subs[i - 1] = dsl::substitute(P.symbolic_expr(), Var::i,
                                    Expr::num(static_cast<long double>(i)));
  }

  bool exact_all = true;
  for (std::uint64_t i = 1; i <= cap; ++i)
    for (std::uint64_t j = 1; j <= cap; ++j) {
      long double m = kInf;
      for (std::uint64_t k = 1; k <= Klev; ++k)
        m = std::min(m, mm.level_logs_[(k - 1) * cap + (j - 1)] -
                            mm.level_logs_[(k - 1) * cap + (i - 1)]);
      bool entry_exact = complete;
      if (grid) {
        const long double c = alpha_vals[j - 1] - alpha_vals[i - 1];
        long double inf_all;
        if (c == 0.0L)
          inf_all = 0.0L;
        else if (c > 0.0L)
          inf_all = c * grid->log_r(1);
        else
          inf_all = grid->infinite_radius ? -kInf : c * grid->sup_log_r();
        m = std::min(m, inf_all);
        entry_exact = true;
      } else if (!subs.empty()) {
        auto mono = growth::analyze(Expr::node(Op::div, {subs[j - 1], subs[i - 1]}),
                                    Var::k, {});
        if (mono) {
          growth::Limit lim = growth::limit_at_infinity(*mono);
          if (auto dec = growth::eventually_decreasing(*mono);
              dec && dec->from <= static_cast<long double>(Klev)) {
            if (lim.kind == growth::LimitKind::zero) {
              m = -kInf;
              entry_exact = true;
            } else if (lim.kind == growth::LimitKind::positive && lim.exact) {
              m = std::min(m, lim.log_value);
              entry_exact = true;
            }
          } else if (auto inc = growth::eventually_increasing(*mono);
                     inc && inc->from <= static_cast<long double>(Klev)) {
            entry_exact = true;  // the prefix minimum is the global infimum
          }
        }
      }
      if (m > 0.0L) m = 0.0L;
      mm.alpha_log_[(i - 1) * cap + (j - 1)] = m;
      exact_all = exact_all && entry_exact;
    }
  mm.exact_ = exact_all;
  return mm;
}

Verdict check_M(const WeightFamily& P, const std::optional<MMatrices>& matrices,
                std::uint64_t depth, std::uint64_t level_budget) {
  if (depth == 0 || level_budget == 0)
    throw ConfigError("depth and level budget must be positive");

  if (is_matrix_builtin(P))
    return Verdict::fails_exact(
        "curated-citation", depth,
        "established analytic fact for this catalog family: no splitting of one "
        "into two matrices can satisfy both sup bounds here",
        nlohmann::json::object());

  if (scalar_index(P) && P.flags().monotone_in_index != IndexMonotonicity::none) {
    std::optional<MMatrices> local;
    const MMatrices* mm = matrices ? &*matrices : nullptr;
    if (!mm) {
      local = construct_M_matrices(P, 64, std::max<std::uint64_t>(level_budget, 16));
      mm = &*local;
    }
    const std::uint64_t levels = std::min<std::uint64_t>(mm->level_cap(), level_budget);
    if (!mm->row_identity_exact(mm->cap()))
      throw InternalError("splitting replay failed: alpha + beta != 1 bitwise");
    long double worst_col = -kInf, worst_tr = -kInf;
    for (std::uint64_t lvl = 1; lvl <= levels; ++lvl) {
      long double wc = 0.0L, wt = 0.0L;
      if (!mm->column_bound_exact(lvl, mm->cap(), &wc))
        throw InternalError("splitting replay failed: alpha bound broken at level " +
                            std::to_string(lvl));
      if (!mm->transpose_bound_exact(lvl, mm->cap(), &wt))
        throw InternalError("splitting replay failed: beta bound broken at level " +
                            std::to_string(lvl));
      worst_col = std::max(worst_col, wc);
      worst_tr = std::max(worst_tr, wt);
    }
    return Verdict::holds_exact(
        "monotone-family-construction", depth,
        "index-monotone weights admit the running-minimum splitting with C = 1 and "
        "q = p at every level; the bounds replayed bitwise on the prefix",
        {{"cap", mm->cap()},
         {"levels_replayed", levels},
         {"entries_exact", mm->exact()},
         {"worst_alpha_slack_log", static_cast<double>(worst_col)},
         {"worst_beta_slack_log", static_cast<double>(worst_tr)}});
  }

  return Verdict::unknown_at(depth,
                             "no splitting construction rule applies to this family");
}

// ---------------------------------------------------------------------------
// Logarithmic growth criterion.

Verdict check_log_criterion(const WeightFamily& P, std::uint64_t depth,
                            std::uint64_t level_budget) {
  if (depth == 0 || level_budget == 0)
    throw ConfigError("depth and level budget must be positive");
  if (P.index_set().kind() != IndexSet::Kind::naturals)
    throw PreconditionError("the log criterion is about weights on the naturals");
  if (!P.flags().all_weights_ge_one)
    throw PreconditionError("the log criterion needs weights at least 1");

  const std::uint64_t K = P.capped_level_count(level_budget);
  const std::uint64_t N = std::min<std::uint64_t>(depth, 8192);
  const bool complete = P.level_count() && *P.level_count() <= K;

  nlohmann::json levels = nlohmann::json::array();
  bool all_failed_exact = true;
  for (std::uint64_t k = 1; k <= K; ++k) {
    ExprPtr ep = P.level_expr(k);
    long double prefix_sup = 0.0L;
    bool flat = false;
    for (std::uint64_t n = 2; n <= N; ++n) {
      long double lp = P.weight_at_rank(k, n).log();
      if (lp <= 0.0L) {
        flat = true;
        break;
      }
      prefix_sup = std::max(prefix_sup, std::log(static_cast<long double>(n)) / lp);
    }
    if (flat) {
      levels.push_back({{"level", k}, {"outcome", "infinite"}, {"rule", "flat-weight-point"}});
      continue;
    }
    std::optional<growth::Monomial> mono_p;
    if (ep) mono_p = growth::analyze(ep, Var::i, {});
    if (mono_p && !mono_p->zero && mono_p->pow == 0.0L && mono_p->expo.empty()) {
      levels.push_back(
          {{"level", k}, {"outcome", "infinite"}, {"rule", "subpolynomial-level"}});
      continue;
    }
    std::optional<growth::Monomial> mono_r;
    if (ep)
      mono_r = growth::analyze(
          Expr::node(Op::div, {Expr::node(Op::log, {Expr::variable(Var::i)}),
                               Expr::node(Op::log, {ep})}),
          Var::i, {});
    if (mono_r) {
      growth::Limit lim = growth::limit_at_infinity(*mono_r);
      if (lim.kind == growth::LimitKind::infinite) {
        levels.push_back(
            {{"level", k}, {"outcome", "infinite"}, {"rule", "ratio-diverges"}});
        continue;
      }
      auto term = [&](std::uint64_t v) {
        long double lp = P.weight_at_rank(k, v).log();
        if (lp <= 0.0L) return LogValue::infinity();
        return LogValue::from_value(std::log(static_cast<long double>(v)) / lp);
      };
      std::string rule;
      if (auto bound = growth::tail_sup_bound(*mono_r, term, N, &rule)) {
        long double sup = std::max(prefix_sup, bound->value());
        return Verdict::holds_exact(
            "log-ratio-bounded", depth,
            "level " + std::to_string(k) + " keeps log(n)/log(p_n) below " +
                fmt_ld(sup) + " (" + rule + ")",
            {{"witness_level", k},
             {"sup_bound", static_cast<double>(sup)},
             {"tail_rule", rule},
             {"levels", levels}});
      }
    }
    all_failed_exact = false;
    levels.push_back({{"level", k}, {"outcome", "unknown"}});
  }

  if (all_failed_exact && complete)
    return Verdict::fails_exact(
        "finite-level-exhaustion", depth,
        "every level has an unbounded log ratio", {{"levels", levels}});

  if (all_failed_exact && P.symbolic_expr() && P.symbolic_expr()->op == Op::pow) {
    const ExprPtr& base = P.symbolic_expr()->kids[0];
    const ExprPtr& expn = P.symbolic_expr()->kids[1];
    auto mb = growth::analyze(base, Var::i, {});
    auto aff = canon::affine_in_k(expn);
    if (mb && !mb->zero && mb->pow == 0.0L && mb->expo.empty() && aff)
      return Verdict::fails_exact(
          "subpoly-power-family", depth,
          "every level is a power of a subpolynomial base, so log(p_n) grows like "
          "log log n and the ratio is unbounded at every level",
          {{"levels", levels}});
  }

  return Verdict::unknown_at(depth, "no level certified a finite log ratio",
                             {{"levels", levels}});
}

// ---------------------------------------------------------------------------
// Profile.

nlohmann::json ConditionProfile::to_json() const {
  nlohmann::json j{{"source", source_name},
                   {"depth", depth},
                   {"level_budget", level_budget},
                   {"notes", propagation_notes}};
  ::koethe::to_json(j["algebra"], algebra);
  ::koethe::to_json(j["U"], U);
  ::koethe::to_json(j["N"], N);
  ::koethe::to_json(j["B"], B);
  ::koethe::to_json(j["M"], M);
  return j;
}

ConditionProfile profile_conditions(const WeightFamily& P, std::uint64_t depth,
                                    std::uint64_t level_budget) {
  ConditionProfile c;
  c.source_name = P.name();
  c.depth = depth;
  c.level_budget = level_budget;

  c.algebra = is_algebra(P, depth, level_budget);
  if (c.algebra.fails())
    throw PreconditionError("the weights do not form an algebra (" + c.algebra.detail +
                            "); no condition profile exists");

  c.U = check_U(P, depth, level_budget);
  c.N = check_N(P, depth, level_budget);
  c.B = check_B(P, depth, level_budget);
  c.M = check_M(P, std::nullopt, depth, level_budget);

  auto upgrade = [&](Verdict& v, const char* name) {
    if (v.fails())
      throw InternalError(std::string("summability contradicts a (") + name +
                          ") failure: oracle inconsistency");
    if (v.unknown()) {
      v = Verdict::holds_exact("unital-corollary", depth,
                               std::string("follows from summability of the weights"));
      c.propagation_notes.push_back(std::string("(") + name +
                                    ") upgraded to Holds: summability implies it");
    }
  };
  if (c.U.holds() && c.U.exact()) {
    upgrade(c.N, "N");
    upgrade(c.B, "B");
    upgrade(c.M, "M");
  }

  auto contrapose = [&](const Verdict& v, const char* name) {
    if (!v.fails() || !v.exact()) return;
    if (c.U.holds())
      throw InternalError(std::string("(") + name +
                          ") fails while the weights are summable: oracle inconsistency");
    if (c.U.unknown()) {
      c.U = Verdict::fails_exact("summability-contrapositive", depth,
                                 std::string("summability would force (") + name +
                                     "), which fails");
      c.propagation_notes.push_back(std::string("(U) downgraded to Fails: (") + name +
                                    ") fails");
    }
  };
  contrapose(c.N, "N");
  contrapose(c.B, "B");
  contrapose(c.M, "M");

  return c;
}

}  // namespace koethe
