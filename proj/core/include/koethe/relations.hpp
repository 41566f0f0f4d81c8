#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "koethe/sequences.hpp"
#include "koethe/verdict.hpp"
#include "koethe/weight_family.hpp"

namespace koethe {

// Per-source-level piece of a domination certificate:
// p^(source) <= exp(logC) * q^(target) on the verified prefix, with the
// rule that certifies the bound beyond the prefix.
struct LevelCert {
  std::uint64_t source_level = 0;
  std::uint64_t target_level = 0;
  long double logC = 0.0L;
  std::string proof_rule;
  std::uint64_t depth = 0;
};

nlohmann::json level_certs_json(const std::vector<LevelCert>& certs);
std::vector<LevelCert> level_certs_from_json(const nlohmann::json& j);

// Transitivity: from p <= C1 q^(m) and q^(m) <= C2 r^(m'), produce
// p <= C1 C2 r^(m').  Returns nothing when the middle certificate does
// not cover a needed source level.
std::optional<std::vector<LevelCert>> compose_certificates(
    const std::vector<LevelCert>& pq, const std::vector<LevelCert>& qr);

// P < Q: every p in P is dominated by a constant multiple of some q in Q.
// Exact Holds needs either a fully certified finite source list or a
// uniform rule covering all source levels; exact Fails needs one source
// level with a divergence proof against every target level.  Everything
// else is Unknown with prefix trend data.
Verdict dominates(const WeightFamily& P, const WeightFamily& Q, std::uint64_t depth,
                  std::uint64_t level_budget);

Verdict equivalent(const WeightFamily& P, const WeightFamily& Q, std::uint64_t depth,
                   std::uint64_t level_budget);

// P < P^2, with the pointwise shortcut for families of weights >= 1 and
// the radius rule for power grids.
Verdict is_algebra(const WeightFamily& P, std::uint64_t depth, std::uint64_t level_budget);

// The explicit sequence showing the space is not closed under pointwise
// products when is_algebra fails: after renumbering levels from the
// failing level m*, scan distinct indices i_1 < i_2 < ... with
// p^(1)_{i_k} > k^4 (p^(k)_{i_k})^2 and put x_{i_k} = 1/(k^2 p^(k)_{i_k}).
// Then every term of ||x^2|| at level m* exceeds 1, while for k >= l the
// level-l terms of ||x|| stay below 1/k^2.
struct NonAlgebraWitness {
  SeqElement x;
  std::uint64_t failing_level = 0;        // m*, the renumbering base
  std::vector<std::uint64_t> indices;     // i_k as enumeration ranks
  LogValue square_partial;                // sum over the support of |x^2| p^(m*)
  std::vector<LogValue> level_partials;   // per l: sum_{k >= l} |x_{i_k}| p^(m*+l-1)_{i_k}
};

NonAlgebraWitness non_algebra_witness(const WeightFamily& P, std::uint64_t k_max,
                                      std::uint64_t scan_budget = 200000000ULL,
                                      bool force = false);

}  // namespace koethe
