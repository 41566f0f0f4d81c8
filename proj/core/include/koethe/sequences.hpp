#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "koethe/expr.hpp"
#include "koethe/log_value.hpp"
#include "koethe/verdict.hpp"
#include "koethe/weight_family.hpp"

namespace koethe {

// A coefficient as magnitude-in-log plus unit phase, so elements whose
// entries overflow native floating point (witness sequences do) stay
// representable.  value = magnitude * e^{i*phase}.
struct Coeff {
  LogValue magnitude = LogValue::zero();
  double phase = 0.0;

  std::complex<double> to_complex() const;
  static Coeff from_complex(std::complex<double> z);
};

// Truncated element of a sequence space: sparse coefficients on
// enumeration ranks 1..N plus an optional closed-form bound |x_i| for
// ranks beyond N (expression in the index variables).
class SeqElement {
 public:
  SeqElement() = default;

  static SeqElement zero(std::uint64_t N);
  static SeqElement unit(std::uint64_t rank, std::uint64_t N);
  static SeqElement from_dense(const std::vector<std::complex<double>>& values);
  static SeqElement from_abs_expr(const dsl::ExprPtr& abs_expr, const IndexSet& idx,
                                  std::uint64_t N, bool as_tail_rule = true);

  std::uint64_t truncation() const { return N_; }
  const std::vector<std::pair<std::uint64_t, Coeff>>& support() const { return support_; }
  const dsl::ExprPtr& tail_rule() const { return tail_rule_; }
  void set_tail_rule(dsl::ExprPtr e) { tail_rule_ = std::move(e); }

  Coeff at(std::uint64_t rank) const;        // zero off-support
  LogValue abs_at(std::uint64_t rank) const;
  void set(std::uint64_t rank, Coeff c);     // keeps support sorted

  bool same_support_and_values(const SeqElement& other) const;

 private:
  std::uint64_t N_ = 0;
  std::vector<std::pair<std::uint64_t, Coeff>> support_;  // sorted by rank
  dsl::ExprPtr tail_rule_;  // |x| for ranks > N; null = no information
};

enum class SeminormStatus { converged, diverging, unknown };

struct SeminormValue {
  LogValue partial = LogValue::zero();          // prefix sum or sup
  std::optional<LogValue> tail_bound;           // certified bound beyond the prefix
  SeminormStatus status = SeminormStatus::unknown;
  std::string rule;

  LogValue total() const;  // partial (+ tail bound if any)
};

// sum_i |x_i| p^(k)_i with a certified tail bound when x carries a tail
// rule the summation catalog covers.
SeminormValue seminorm_l1(const SeqElement& x, const WeightFamily& P, std::uint64_t k);
// sup_i |x_i| p^(k)_i, tail handled through the monotone-tail catalog.
SeminormValue seminorm_sup(const SeqElement& x, const WeightFamily& P, std::uint64_t k);

SeqElement pointwise_mul(const SeqElement& x, const SeqElement& y);

struct MulBoundReport {
  std::uint64_t p_level = 0, q_level = 0;
  LogValue lhs;          // ||xy||_p on the prefix
  LogValue rhs;          // C * ||x||_q * ||y||_q
  long double logC = 0.0L;
  bool holds = true;
  std::string rule;
};
// Replays the multiplication estimate backing the algebra certificate.
MulBoundReport mul_bound_check(const SeqElement& x, const SeqElement& y,
                               const WeightFamily& P, std::uint64_t k,
                               std::uint64_t depth);

// x in lambda(P): every level's series certified convergent (Holds needs
// a uniform-in-level rule or a finite level list), some level certified
// divergent (Fails), otherwise Unknown.
Verdict membership(const SeqElement& x, const WeightFamily& P, std::uint64_t depth,
                   std::uint64_t level_budget = 8);

// Necessary-condition sampling of the Köthe–Toeplitz dual pairing
// against the supplied generators; holds outcomes are sample-relative.
Verdict dual_membership(const SeqElement& y, const std::vector<SeqElement>& generators,
                        std::uint64_t depth);

// ---- Taylor-coefficient arithmetic (Hadamard products) ----

using CoeffSeq = std::vector<std::complex<double>>;

CoeffSeq hadamard_mul(const CoeffSeq& f, const CoeffSeq& g, std::size_t N);

// Coefficient constructors; index n starts at 0 for z^n.
CoeffSeq taylor_geometric(std::size_t N);  // (1-z)^{-1}: all ones
CoeffSeq taylor_exp(std::size_t N);        // 1/n!
CoeffSeq taylor_poly(const std::vector<std::complex<double>>& coeffs, std::size_t N);

}  // namespace koethe
