#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "koethe/conditions.hpp"
#include "koethe/sequences.hpp"
#include "koethe/weight_family.hpp"

namespace koethe {

// One step of the multiplier net for a fixed element a: the finite index
// set J_n = J'_n u J''_n and its characteristic sequence u_n.  I' collects
// the indices with p_i > 1 (captured through a higher level q), I'' the
// rest (captured by driving the tail mass under 1/n^2).
struct ApproxIdentityStep {
  std::uint64_t n = 0;
  std::vector<std::uint64_t> J_prime;         // ranks i in I' with q_i <= n
  std::vector<std::uint64_t> J_double_prime;  // minimal prefix of I'' meeting the tail bound
  SeqElement u;                               // characteristic sequence of the union
  std::uint64_t p_level = 0;
  std::uint64_t q_level = 0;
};

// Builds the step for one n.  The q level defaults to the smallest level
// >= p_level whose weights certifiably tend to infinity on I' (so J'_n is
// finite); q_override forces a specific level instead.
ApproxIdentityStep build_un(const SeqElement& a, const WeightFamily& P,
                            std::uint64_t p_level, std::uint64_t n,
                            std::uint64_t depth = 10000,
                            std::optional<std::uint64_t> q_override = std::nullopt);

// n * sup_{i not in J_n} |a_i| p_i per step, next to the two analytic
// branch bounds: the I'' part is < 1/n by construction, the I' part is
// <= sup_{i not in J'_n} |a_i| q_i^2.
struct ConvergenceRow {
  std::uint64_t n = 0;
  long double value = 0.0L;
  long double branch_bound_Ipp = 0.0L;
  long double branch_bound_Ip = 0.0L;
};

struct ConvergenceReport {
  std::uint64_t p_level = 0;
  std::uint64_t q_level = 0;
  std::vector<ConvergenceRow> rows;
  bool below_epsilon_at_end = false;
  bool monotone_after_grace = false;   // nonincreasing once past the grace window
  std::uint64_t grace_window = 0;
  std::string note;
  nlohmann::json to_json() const;
  std::string to_csv() const;          // columns: n,value,branch_bound_Ipp,branch_bound_Ip
};

ConvergenceReport verify_convergence(const SeqElement& a, const WeightFamily& P,
                                     std::uint64_t p_level,
                                     const std::vector<ApproxIdentityStep>& steps,
                                     long double epsilon = 1e-6L);

// Multiplier-net sanity battery on finite samples: (i) ||a - a u_n||_p -> 0,
// (ii) ||a - a u_n||_p * ||u_n||_p -> 0, (iii) 2u - u^2 == u bitwise
// (characteristic sequences square to themselves), (iv) a u == u a bitwise.
struct LawsonReadRow {
  std::uint64_t n = 0;
  std::size_t sample = 0;
  long double value_i = 0.0L;
  long double value_ii = 0.0L;
};

struct LawsonReadReport {
  std::vector<LawsonReadRow> rows;
  bool cond_iii_exact = false;
  bool cond_iv_exact = false;
  long double final_max_i = 0.0L;   // max over samples at the largest n
  long double final_max_ii = 0.0L;
  nlohmann::json to_json() const;
};

LawsonReadReport verify_lawson_read(const std::vector<SeqElement>& A_sample,
                                    const WeightFamily& P,
                                    const std::vector<ApproxIdentityStep>& steps,
                                    std::uint64_t depth = 10000);

// b with b_i^2 = a_i: magnitude sqrt(|a_i|) and half the phase (principal
// square root).  The tail rule, when present, becomes the square root of
// a's tail rule.
SeqElement square_decompose(const SeqElement& a);

// Membership of the coordinatewise square root of |a|; by the square
// factorization characterization this decides whether a is a product of
// two space elements.
Verdict sqrt_membership(const SeqElement& a, const WeightFamily& P, std::uint64_t depth,
                        std::uint64_t level_budget = 8);

// Does the coordinatewise product map the space onto itself?  Reports the
// nuclearity check, the log-ratio criterion, and a seeded sample battery
// of square-root membership tests, which must all point the same way.
struct IdempotenceSample {
  std::string description;
  Verdict in_space;
  Verdict sqrt_in_space;
};

struct IdempotenceReport {
  Verdict nuclearity;       // condition (i) of the equivalence battery
  Verdict log_criterion;    // condition (iv)
  std::vector<IdempotenceSample> samples;  // condition (iii) spot checks
  std::string dual_note;    // the dual-space condition is recorded, not decided
  nlohmann::json to_json() const;
};

IdempotenceReport idempotence_profile(const WeightFamily& P, std::uint64_t depth = 10000,
                                      std::uint64_t level_budget = 8, std::uint64_t seed = 0,
                                      std::size_t sample_count = 16);

// When the log-ratio criterion fails at every level: a block-constant
// element a (a_m = 1/k_n^3 on block n) that lies in the space while the
// coordinatewise fourth root escapes it, so a is not a product of two
// elements.  Blocks satisfy p^(n)_{k_n} <= k_n^{1/n} and k_n >= 2 k_{n-1}.
struct NonIdempotentWitness {
  SeqElement a;
  std::vector<std::uint64_t> block_ends;          // k_1 < k_2 < ...
  std::vector<long double> fourth_root_partials;  // per block: running sum of |a_m|^{1/4}
  std::vector<LogValue> level_partials;           // per level i: sum_{m <= k_B} |a_m| p^(i)_m
  std::vector<LogValue> level_tail_bounds;        // analytic bound on the remainder
};

NonIdempotentWitness non_idempotent_witness(const WeightFamily& P, std::uint64_t depth,
                                            std::uint64_t level_budget = 8);

}  // namespace koethe
