#include "koethe/weight_family.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include <nlohmann/json.hpp>

#include "koethe/errors.hpp"
#include "koethe/growth.hpp"

namespace koethe {

using dsl::Expr;
using dsl::ExprPtr;
using dsl::Op;
using dsl::Var;

long double PowerGrid::log_r(std::uint64_t m) const {
  long double lr = infinite_radius
                       ? std::log(static_cast<long double>(m))
                       : std::log(radius) + std::log(static_cast<long double>(m)) -
                             std::log(static_cast<long double>(m) + 1.0L);
  return lr * power;
}

long double PowerGrid::sup_log_r() const {
  if (infinite_radius) return std::numeric_limits<long double>::infinity();
  return power * std::log(radius);
}

WeightFamily WeightFamily::from_expr(IndexSet idx, ExprPtr family_expr, FamilyFlags flags,
                                     std::string name) {
  if (!family_expr) throw ConfigError("weight expression is empty");
  dsl::validate_weight_expr(family_expr, idx, /*allow_level_var=*/true);
  WeightFamily P;
  P.idx_ = idx;
  P.flags_ = flags;
  P.kind_ = Kind::symbolic;
  P.name_ = std::move(name);
  P.family_expr_ = std::move(family_expr);
  if (!P.family_expr_->contains(Var::k)) P.level_count_ = 1;
  return P;
}

WeightFamily WeightFamily::from_levels(IndexSet idx, std::vector<ExprPtr> levels,
                                       FamilyFlags flags, std::string name) {
  if (levels.empty()) throw ConfigError("a weight family needs at least one level");
  for (const auto& e : levels) {
    if (!e) throw ConfigError("weight expression is empty");
    dsl::validate_weight_expr(e, idx, /*allow_level_var=*/false);
  }
  WeightFamily P;
  P.idx_ = idx;
  P.flags_ = flags;
  P.kind_ = Kind::level_list;
  P.name_ = std::move(name);
  P.level_count_ = levels.size();
  P.levels_ = std::move(levels);
  return P;
}

std::uint64_t WeightFamily::capped_level_count(std::uint64_t budget) const {
  if (level_count_ && *level_count_ < budget) return *level_count_;
  return budget;
}

namespace {

// Level pairs of a product family: row-major when a side is finite,
// diagonal enumeration otherwise.
std::pair<std::uint64_t, std::uint64_t> product_levels(
    const std::optional<std::uint64_t>& cP, const std::optional<std::uint64_t>& cQ,
    std::uint64_t k) {
  if (cP && cQ) return {(k - 1) / *cQ + 1, (k - 1) % *cQ + 1};
  if (cP) return {(k - 1) % *cP + 1, (k - 1) / *cP + 1};
  if (cQ) return {(k - 1) / *cQ + 1, (k - 1) % *cQ + 1};
  Index pr = IndexSet::natural_pairs().at(k);
  return {pr.i, pr.j};
}

}  // namespace

ExprPtr WeightFamily::level_expr(std::uint64_t k) const {
  if (k == 0) throw ConfigError("levels are 1-based");
  if (level_count_ && k > *level_count_) {
    throw ConfigError("level " + std::to_string(k) + " beyond the " +
                      std::to_string(*level_count_) + " available");
  }
  switch (derived_) {
    case Derived::square_of: {
      ExprPtr e = parents_[0]->level_expr(k);
      return e ? Expr::node(Op::mul, {e, e}) : nullptr;
    }
    case Derived::bar_of: {
      ExprPtr e = parents_[0]->level_expr(k);
      return e ? Expr::node(Op::min, {e, Expr::num(1.0L)}) : nullptr;
    }
    case Derived::none:
    case Derived::product_of:
      break;
  }
  switch (kind_) {
    case Kind::symbolic:
      return dsl::substitute(family_expr_, Var::k, Expr::num(static_cast<long double>(k)));
    case Kind::level_list:
      return levels_[k - 1];
    case Kind::pairwise_product: {
      auto [a, b] = product_levels(parents_[0]->level_count(), parents_[1]->level_count(), k);
      ExprPtr ea = parents_[0]->level_expr(a);
      ExprPtr eb = parents_[1]->level_expr(b);
      return (ea && eb) ? Expr::node(Op::mul, {ea, eb}) : nullptr;
    }
  }
  throw InternalError("unreachable family kind");
}

LogValue WeightFamily::weight(std::uint64_t k, const Index& ix) const {
  if (k == 0) throw ConfigError("levels are 1-based");
  if (level_count_ && k > *level_count_) {
    throw ConfigError("level " + std::to_string(k) + " beyond the " +
                      std::to_string(*level_count_) + " available");
  }
  switch (derived_) {
    case Derived::square_of:
      return parents_[0]->weight(k, ix).pow(2.0L);
    case Derived::bar_of:
      return LogValue::min(parents_[0]->weight(k, ix), LogValue::one());
    case Derived::none:
    case Derived::product_of:
      break;
  }
  dsl::Bindings b;
  b.i = static_cast<long double>(ix.i);
  if (ix.is_pair()) b.j = static_cast<long double>(ix.j);
  switch (kind_) {
    case Kind::symbolic:
      b.k = static_cast<long double>(k);
      return family_expr_->eval(b);
    case Kind::level_list:
      return levels_[k - 1]->eval(b);
    case Kind::pairwise_product: {
      auto [ka, kb] = product_levels(parents_[0]->level_count(), parents_[1]->level_count(), k);
      return parents_[0]->weight(ka, ix) * parents_[1]->weight(kb, ix);
    }
  }
  throw InternalError("unreachable family kind");
}

LogValue WeightFamily::weight_at_rank(std::uint64_t k, std::uint64_t rank) const {
  return weight(k, idx_.at(rank));
}

const std::shared_ptr<const WeightFamily>& WeightFamily::parent(std::size_t which) const {
  if (which >= parents_.size()) throw InternalError("no such parent family");
  return parents_[which];
}

namespace {

ExprPtr parse_alpha(const nlohmann::json& params) {
  std::string text = params.contains("alpha") ? params.at("alpha").get<std::string>() : "i";
  ExprPtr alpha = dsl::parse(text);
  if (alpha->contains(Var::j) || alpha->contains(Var::k)) {
    throw ConfigError("alpha must be an expression in i alone");
  }
  dsl::validate_weight_expr(alpha, IndexSet::naturals(), /*allow_level_var=*/false);
  if (auto m = growth::analyze(alpha, Var::i, {})) {
    if (growth::limit_at_infinity(*m).kind != growth::LimitKind::infinite) {
      throw ConfigError("alpha must be unbounded");
    }
  }
  return alpha;
}

struct RadiusSpec {
  bool infinite = false;
  long double R = 0.0L;
};

RadiusSpec parse_radius(const nlohmann::json& params, bool allow_infinite) {
  if (!params.contains("R")) throw ConfigError("missing radius parameter R");
  const auto& r = params.at("R");
  if (r.is_string()) {
    if (allow_infinite && (r == "inf" || r == "infinity")) return {true, 0.0L};
    throw ConfigError("radius must be a positive number" +
                      std::string(allow_infinite ? " or \"inf\"" : ""));
  }
  long double R = r.get<double>();
  if (!(R > 0.0L) || std::isinf(R)) throw ConfigError("radius must be a positive finite number");
  return {false, R};
}

struct GridParts {
  WeightFamily family;
  PowerGrid grid;
  BuiltinInfo info;
};

// r_m = R*m/(m+1) (finite R) or r_m = m, raised to alpha_i.
GridParts grid_family(const std::string& id, const RadiusSpec& rs, ExprPtr alpha,
                      std::string name) {
  ExprPtr vk = Expr::variable(Var::k);
  ExprPtr base = rs.infinite
                     ? vk
                     : Expr::node(Op::mul, {Expr::num(rs.R),
                                            Expr::node(Op::div, {vk, Expr::node(Op::add, {vk, Expr::num(1.0L)})})});
  ExprPtr expr = Expr::node(Op::pow, {base, alpha});
  FamilyFlags flags;
  flags.pointwise_ordered = true;  // r_m increases and alpha > 0
  if (rs.infinite || rs.R >= 2.0L) {
    flags.monotone_in_index = IndexMonotonicity::nondecreasing;  // every r_m >= 1
    flags.all_weights_ge_one = true;
  } else if (rs.R <= 1.0L) {
    flags.monotone_in_index = IndexMonotonicity::nonincreasing;  // every r_m < 1
    flags.all_weights_ge_one = false;
  } else {
    flags.monotone_in_index = IndexMonotonicity::none;  // r_m straddles 1
    flags.all_weights_ge_one = false;
  }
  GridParts parts{
      WeightFamily::from_expr(IndexSet::naturals(), expr, flags, std::move(name)), {}, {}};
  parts.grid.infinite_radius = rs.infinite;
  parts.grid.radius = rs.R;
  parts.grid.power = 1;
  parts.grid.alpha = alpha;
  parts.info.id = id;
  if (!rs.infinite) parts.info.R = rs.R;
  parts.info.alpha_text = alpha->str();
  return parts;
}

std::string number_text(long double x) {
  // Render integral radii without a trailing ".000000".
  if (x == static_cast<long double>(static_cast<long long>(x))) {
    return std::to_string(static_cast<long long>(x));
  }
  return std::to_string(static_cast<double>(x));
}

}  // namespace

WeightFamily make_builtin(const std::string& family_id, const nlohmann::json& params) {
  ExprPtr vi = Expr::variable(Var::i);
  ExprPtr vj = Expr::variable(Var::j);
  ExprPtr vk = Expr::variable(Var::k);

  if (family_id == "l1" || family_id == "finite_dim") {
    IndexSet idx = IndexSet::naturals();
    std::string name = "l1";
    std::optional<std::uint64_t> n;
    if (family_id == "finite_dim") {
      if (!params.contains("n")) throw ConfigError("finite_dim needs a dimension n");
      n = params.at("n").get<std::uint64_t>();
      idx = IndexSet::finite(*n);
      name = "finite_dim(" + std::to_string(*n) + ")";
    }
    FamilyFlags flags;
    flags.pointwise_ordered = true;
    flags.monotone_in_index = IndexMonotonicity::nondecreasing;
    flags.all_weights_ge_one = true;
    WeightFamily P = WeightFamily::from_levels(idx, {Expr::num(1.0L)}, flags, name);
    BuiltinInfo info;
    info.id = family_id;
    info.n = n;
    P.builtin_ = info;
    return P;
  }

  if (family_id == "s") {
    FamilyFlags flags;
    flags.pointwise_ordered = true;
    flags.monotone_in_index = IndexMonotonicity::nondecreasing;
    flags.all_weights_ge_one = true;
    WeightFamily P = WeightFamily::from_expr(IndexSet::naturals(),
                                             Expr::node(Op::pow, {vi, vk}), flags, "s");
    BuiltinInfo info;
    info.id = "s";
    P.builtin_ = info;
    return P;
  }

  if (family_id == "entire" || family_id == "power_series" || family_id == "hadamard_disk") {
    GridParts parts = [&] {
      if (family_id == "entire") return grid_family("entire", RadiusSpec{true, 0.0L}, vi, "entire");
      if (family_id == "hadamard_disk") {
        RadiusSpec rs = parse_radius(params, /*allow_infinite=*/false);
        return grid_family("hadamard_disk", rs, vi, "hadamard_disk(" + number_text(rs.R) + ")");
      }
      RadiusSpec rs = parse_radius(params, /*allow_infinite=*/true);
      ExprPtr alpha = parse_alpha(params);
      std::string name = "power_series(" + (rs.infinite ? "inf" : number_text(rs.R)) +
                         ",alpha=" + alpha->str() + ")";
      return grid_family("power_series", rs, alpha, name);
    }();
    parts.family.grid_ = parts.grid;
    parts.family.builtin_ = parts.info;
    return std::move(parts.family);
  }

  if (family_id == "matrix_example") {
    // 2^((k*j)^i) * (i+j)^k when i <= k, else (i+j)^k.
    ExprPtr ipj_k = Expr::node(Op::pow, {Expr::node(Op::add, {vi, vj}), vk});
    ExprPtr heavy = Expr::node(
        Op::mul,
        {Expr::node(Op::pow, {Expr::num(2.0L), Expr::node(Op::pow, {Expr::node(Op::mul, {vk, vj}), vi})}),
         ipj_k});
    ExprPtr expr = Expr::piecewise(dsl::Cmp::le, vi, vk, heavy, ipj_k);
    FamilyFlags flags;
    flags.pointwise_ordered = true;
    flags.monotone_in_index = IndexMonotonicity::none;
    flags.all_weights_ge_one = true;
    WeightFamily P =
        WeightFamily::from_expr(IndexSet::natural_pairs(), expr, flags, "matrix_example");
    BuiltinInfo info;
    info.id = "matrix_example";
    P.builtin_ = info;
    return P;
  }

  throw ConfigError("unknown builtin family: " + family_id);
}

WeightFamily product_family(const WeightFamily& P, const WeightFamily& Q) {
  if (!(P.idx_ == Q.idx_)) throw ConfigError("product of families on different index sets");
  WeightFamily R;
  R.idx_ = P.idx_;
  R.kind_ = WeightFamily::Kind::pairwise_product;
  R.derived_ = WeightFamily::Derived::product_of;
  R.name_ = P.name_ + "*" + Q.name_;
  R.parents_ = {std::make_shared<WeightFamily>(P), std::make_shared<WeightFamily>(Q)};
  if (P.level_count_ && Q.level_count_) R.level_count_ = *P.level_count_ * *Q.level_count_;
  R.flags_.pointwise_ordered = P.flags_.pointwise_ordered && Q.flags_.pointwise_ordered &&
                               P.capped_level_count(2) <= 1 && Q.capped_level_count(2) <= 1;
  if (P.flags_.monotone_in_index == Q.flags_.monotone_in_index) {
    R.flags_.monotone_in_index = P.flags_.monotone_in_index;
  }
  R.flags_.all_weights_ge_one = P.flags_.all_weights_ge_one && Q.flags_.all_weights_ge_one;
  return R;
}

WeightFamily square(const WeightFamily& P) {
  WeightFamily S = P;
  S.derived_ = WeightFamily::Derived::square_of;
  S.parents_ = {std::make_shared<WeightFamily>(P)};
  S.name_ = "square(" + P.name_ + ")";
  S.builtin_.reset();
  if (S.family_expr_) S.family_expr_ = Expr::node(Op::mul, {P.family_expr_, P.family_expr_});
  for (auto& lvl : S.levels_) lvl = Expr::node(Op::mul, {lvl, lvl});
  if (S.grid_) S.grid_->power = P.grid_->power * 2;
  return S;
}

WeightFamily bar_family(const WeightFamily& P) {
  WeightFamily B = P;
  B.derived_ = WeightFamily::Derived::bar_of;
  B.parents_ = {std::make_shared<WeightFamily>(P)};
  B.name_ = "bar(" + P.name_ + ")";
  B.builtin_.reset();
  ExprPtr one = Expr::num(1.0L);
  if (B.family_expr_) B.family_expr_ = Expr::node(Op::min, {P.family_expr_, one});
  for (auto& lvl : B.levels_) lvl = Expr::node(Op::min, {lvl, one});
  if (B.grid_ && B.grid_->sup_log_r() > 0.0L) B.grid_.reset();
  return B;
}

namespace {

const char* check_flag_mismatch(const WeightFamily& P, std::uint64_t depth,
                                std::uint64_t level_cap, std::uint64_t* bad_rank,
                                std::uint64_t* bad_level) {
  const std::uint64_t N = P.index_set().scan_count(depth);
  const std::uint64_t K = P.capped_level_count(level_cap);
  for (std::uint64_t k = 1; k <= K; ++k) {
    LogValue prev;
    bool have_prev = false;
    for (std::uint64_t r = 1; r <= N; ++r) {
      LogValue w = P.weight_at_rank(k, r);
      if (P.flags().all_weights_ge_one && w < LogValue::one()) {
        *bad_rank = r;
        *bad_level = k;
        return "all_weights_ge_one";
      }
      if (P.flags().pointwise_ordered && k < K) {
        if (P.weight_at_rank(k + 1, r) < w) {
          *bad_rank = r;
          *bad_level = k;
          return "pointwise_ordered";
        }
      }
      if (P.index_set().kind() != IndexSet::Kind::natural_pairs && have_prev) {
        if (P.flags().monotone_in_index == IndexMonotonicity::nondecreasing && w < prev) {
          *bad_rank = r;
          *bad_level = k;
          return "monotone_in_index";
        }
        if (P.flags().monotone_in_index == IndexMonotonicity::nonincreasing && w > prev) {
          *bad_rank = r;
          *bad_level = k;
          return "monotone_in_index";
        }
      }
      prev = w;
      have_prev = true;
    }
  }
  return nullptr;
}

}  // namespace

Verdict axioms_check(const WeightFamily& P, std::uint64_t depth) {
  if (depth == 0) throw ConfigError("axioms_check needs depth >= 1");
  constexpr std::uint64_t kLevelCap = 16;
  const std::uint64_t N = P.index_set().scan_count(depth);
  const std::uint64_t K = P.capped_level_count(kLevelCap);

  std::uint64_t bad_rank = 0, bad_level = 0;
  if (const char* flag = check_flag_mismatch(P, depth, kLevelCap, &bad_rank, &bad_level)) {
    return Verdict::fails_exact(
        "flag-mismatch", depth,
        std::string("declared flag ") + flag + " contradicted at level " +
            std::to_string(bad_level) + ", rank " + std::to_string(bad_rank));
  }

  // Positivity of every index at some level.
  for (std::uint64_t r = 1; r <= N; ++r) {
    bool positive = false;
    for (std::uint64_t k = 1; k <= K && !positive; ++k) {
      positive = !P.weight_at_rank(k, r).is_zero();
    }
    if (!positive) {
      if (P.level_count() && *P.level_count() <= K) {
        return Verdict::fails_exact("positivity", depth,
                                    "all levels vanish at rank " + std::to_string(r));
      }
      return Verdict::unknown_at(depth, "no positive level found at rank " + std::to_string(r) +
                                            " within the first " + std::to_string(K) +
                                            " levels");
    }
  }

  // Directedness: every two levels admit a dominating level.
  if (!P.flags().pointwise_ordered) {
    const std::uint64_t avail = P.capped_level_count(kLevelCap);
    for (std::uint64_t k1 = 1; k1 <= K; ++k1) {
      for (std::uint64_t k2 = k1 + 1; k2 <= K; ++k2) {
        bool dominated = false;
        for (std::uint64_t m = 1; m <= avail && !dominated; ++m) {
          bool ok = true;
          for (std::uint64_t r = 1; r <= N && ok; ++r) {
            LogValue top = LogValue::max(P.weight_at_rank(k1, r), P.weight_at_rank(k2, r));
            ok = top <= P.weight_at_rank(m, r);
          }
          dominated = ok;
        }
        if (!dominated) {
          return Verdict::unknown_at(depth, "no dominating level found for the pair (" +
                                                std::to_string(k1) + ", " + std::to_string(k2) +
                                                ") within the first " + std::to_string(avail) +
                                                " levels");
        }
      }
    }
  }

  nlohmann::json cert;
  cert["prefix"] = N;
  cert["levels_checked"] = K;
  cert["directedness"] = P.flags().pointwise_ordered ? "pointwise-ordered" : "pairwise-search";
  return Verdict::holds_exact("axioms-prefix", depth, "", cert);
}

const char* monotonicity_name(IndexMonotonicity m) {
  switch (m) {
    case IndexMonotonicity::nondecreasing: return "nondecreasing";
    case IndexMonotonicity::nonincreasing: return "nonincreasing";
    case IndexMonotonicity::none: return "none";
  }
  return "";
}

std::optional<IndexMonotonicity> monotonicity_from_name(const std::string& s) {
  if (s == "nondecreasing") return IndexMonotonicity::nondecreasing;
  if (s == "nonincreasing") return IndexMonotonicity::nonincreasing;
  if (s == "none") return IndexMonotonicity::none;
  return std::nullopt;
}

}  // namespace koethe
