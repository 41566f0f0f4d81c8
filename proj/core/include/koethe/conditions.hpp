#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "koethe/relations.hpp"
#include "koethe/verdict.hpp"
#include "koethe/weight_family.hpp"

namespace koethe {

// (U): every level is summable, sum_i p^(k)_i < infinity for all k.
Verdict check_U(const WeightFamily& P, std::uint64_t depth, std::uint64_t level_budget = 8);

// (N): every level p admits a higher level q with sum_i p_i/q_i < infinity
// (term conventions: 0 when p_i = 0, +infinity when p_i > 0 = q_i).
Verdict check_N(const WeightFamily& P, std::uint64_t depth, std::uint64_t level_budget = 8);

// (B): P ~ P^2.  Precondition: is_algebra(P) does not Fail.
Verdict check_B(const WeightFamily& P, std::uint64_t depth, std::uint64_t level_budget = 8);

// Splitting matrices alpha_ij = min{1, inf over levels of p_j/p_i},
// beta = 1 - alpha.  Stored as logs of a capped running minimum over
// levels, sharpened by a limit certificate from the growth oracle where
// one exists; `exact()` reports whether every entry's infimum is
// certified rather than merely sampled.
class MMatrices {
 public:
  MMatrices() = default;

  double alpha(std::uint64_t i, std::uint64_t j) const;  // 1-based, in [0, 1]
  double beta(std::uint64_t i, std::uint64_t j) const;   // 1 - alpha, bitwise
  long double alpha_log(std::uint64_t i, std::uint64_t j) const;

  std::uint64_t cap() const { return cap_; }
  std::uint64_t level_cap() const { return level_cap_; }
  bool exact() const { return exact_; }

  // Bitwise log-domain replays on the (i,j) <= prefix square:
  // alpha + beta == 1; alpha_ij p_i p_j <= p_j^2 at the given level;
  // beta_ij p_i p_j <= p_i^2 at the given level.
  bool row_identity_exact(std::uint64_t prefix) const;
  bool column_bound_exact(std::uint64_t level, std::uint64_t prefix,
                          long double* worst_slack_log = nullptr) const;
  bool transpose_bound_exact(std::uint64_t level, std::uint64_t prefix,
                             long double* worst_slack_log = nullptr) const;

 private:
  friend MMatrices construct_M_matrices(const WeightFamily&, std::uint64_t, std::uint64_t);

  std::shared_ptr<const WeightFamily> family_;
  std::uint64_t cap_ = 0;
  std::uint64_t level_cap_ = 0;
  bool exact_ = false;
  std::vector<long double> alpha_log_;   // row-major (i-1)*cap + (j-1); clamped <= 0
  std::vector<long double> level_logs_;  // (k-1)*cap + (i-1): the construction's own
                                         // log-weight table, reused by the replays
};

// Throws PreconditionError unless the index set is scalar (naturals or
// finite) and the family is monotone in the index — the hypothesis of the
// splitting construction.
MMatrices construct_M_matrices(const WeightFamily& P, std::uint64_t cap = 200,
                               std::uint64_t level_cap = 64);

// (M): splitting matrices with the two sup bounds exist.  Monotone
// scalar-indexed families Hold exactly via the constructed matrices; the
// curated counterexample family Fails exactly; everything else is
// Unknown.
Verdict check_M(const WeightFamily& P, const std::optional<MMatrices>& matrices,
                std::uint64_t depth, std::uint64_t level_budget = 8);

// sup_{n >= 2} log(n) / log(p^(k)_n) finite for some level k.
// Precondition: naturals index and all_weights_ge_one.
Verdict check_log_criterion(const WeightFamily& P, std::uint64_t depth,
                            std::uint64_t level_budget = 8);

// The four condition verdicts for one family, with summability
// propagated: a Holds for (U) forces (N), (B), (M) to Holds.
struct ConditionProfile {
  std::string source_name;
  std::uint64_t depth = 0;
  std::uint64_t level_budget = 0;
  Verdict algebra;
  Verdict U;
  Verdict N;
  Verdict B;
  Verdict M;
  std::vector<std::string> propagation_notes;

  nlohmann::json to_json() const;
};

// Runs all four checks and applies the propagation; throws
// PreconditionError when is_algebra(P) Fails.
ConditionProfile profile_conditions(const WeightFamily& P, std::uint64_t depth,
                                    std::uint64_t level_budget);

}  // namespace koethe
