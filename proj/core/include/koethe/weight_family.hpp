#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "koethe/expr.hpp"
#include "koethe/index_set.hpp"
#include "koethe/log_value.hpp"
#include "koethe/verdict.hpp"

namespace koethe {

enum class IndexMonotonicity { nondecreasing, nonincreasing, none };

struct FamilyFlags {
  bool pointwise_ordered = false;            // p^(k) <= p^(k+1) pointwise
  IndexMonotonicity monotone_in_index = IndexMonotonicity::none;
  bool all_weights_ge_one = false;
};

// Level grid r_1 < r_2 < ... -> sup_radius, weights r_m^(alpha_i).
// Families of this shape get closed-form domination, summability and
// nuclearity rules keyed on the radius alone.
struct PowerGrid {
  bool infinite_radius = false;
  long double radius = 0.0L;  // for finite radius: grid R*m/(m+1)
  int power = 1;              // squaring a grid family doubles this
  dsl::ExprPtr alpha;         // positive nondecreasing unbounded, variable i

  long double log_r(std::uint64_t m) const;  // log of the level-m radius
  long double sup_log_r() const;             // log of the supremum (maybe +inf)
};

struct BuiltinInfo {
  std::string id;  // l1 | finite_dim | s | entire | power_series | hadamard_disk | matrix_example
  std::optional<long double> R;
  std::optional<std::uint64_t> n;
  std::string alpha_text;
};

// A countable family of nonnegative weight functions on a countable
// index set, with structure metadata used by the exact-tier oracles.
class WeightFamily {
 public:
  enum class Kind { symbolic, level_list, pairwise_product };

  static WeightFamily from_expr(IndexSet idx, dsl::ExprPtr family_expr, FamilyFlags flags,
                                std::string name = {});
  static WeightFamily from_levels(IndexSet idx, std::vector<dsl::ExprPtr> levels,
                                  FamilyFlags flags, std::string name = {});

  const IndexSet& index_set() const { return idx_; }
  const FamilyFlags& flags() const { return flags_; }
  const std::string& name() const { return name_; }
  Kind kind() const { return kind_; }

  // nullopt = countably infinite level list
  std::optional<std::uint64_t> level_count() const { return level_count_; }
  std::uint64_t capped_level_count(std::uint64_t budget) const;

  // Expression in the index variables with the level bound; levels are
  // 1-based ranks.
  dsl::ExprPtr level_expr(std::uint64_t k) const;
  // Expression with the level variable k still free, when the family is
  // uniformly defined.  Null for per-level lists and pairwise products.
  const dsl::ExprPtr& symbolic_expr() const { return family_expr_; }

  LogValue weight(std::uint64_t k, const Index& ix) const;
  LogValue weight_at_rank(std::uint64_t k, std::uint64_t rank) const;

  const std::optional<BuiltinInfo>& builtin() const { return builtin_; }
  const std::optional<PowerGrid>& power_grid() const { return grid_; }

  // Derivation links (set by square/product/bar) used by structural rules.
  enum class Derived { none, square_of, bar_of, product_of };
  Derived derived() const { return derived_; }
  const std::shared_ptr<const WeightFamily>& parent(std::size_t which = 0) const;

  friend WeightFamily make_builtin(const std::string& family_id,
                                   const nlohmann::json& params);
  friend WeightFamily product_family(const WeightFamily& P, const WeightFamily& Q);
  friend WeightFamily square(const WeightFamily& P);
  friend WeightFamily bar_family(const WeightFamily& P);

 private:
  WeightFamily() = default;

  IndexSet idx_ = IndexSet::naturals();
  FamilyFlags flags_;
  Kind kind_ = Kind::symbolic;
  std::string name_;
  std::optional<std::uint64_t> level_count_;
  dsl::ExprPtr family_expr_;            // symbolic kind
  std::vector<dsl::ExprPtr> levels_;    // level_list kind
  std::optional<BuiltinInfo> builtin_;
  std::optional<PowerGrid> grid_;
  Derived derived_ = Derived::none;
  std::vector<std::shared_ptr<const WeightFamily>> parents_;
};

// Catalog families.  params (JSON object) carries what the family needs:
//   l1: {} | finite_dim: {"n": 64} | s: {} | entire: {}
//   power_series: {"R": 2.0 | "inf", "alpha": "i"}
//   hadamard_disk: {"R": 1.0} | matrix_example: {}
WeightFamily make_builtin(const std::string& family_id, const nlohmann::json& params);

// All pairwise products p*q, levels enumerated in Cantor order over
// level pairs.
WeightFamily product_family(const WeightFamily& P, const WeightFamily& Q);
// Diagonal presentation {p^2 : p in P} of product_family(P, P).
WeightFamily square(const WeightFamily& P);
// Weights clamped above by 1.
WeightFamily bar_family(const WeightFamily& P);

// Positivity of every index at some level, and directedness of pairs of
// levels under a dominating level, verified on the depth-prefix.
Verdict axioms_check(const WeightFamily& P, std::uint64_t depth);

const char* monotonicity_name(IndexMonotonicity m);
std::optional<IndexMonotonicity> monotonicity_from_name(const std::string& s);

}  // namespace koethe
