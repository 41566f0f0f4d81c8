// End-to-end acceptance battery: eight checks over the catalog, one
// pass/fail line each.  Expected values are restated here as closed forms
// or frozen constants, independent of the library internals.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "koethe/approx.hpp"
#include "koethe/classifier.hpp"
#include "koethe/errors.hpp"

using namespace koethe;

namespace {

struct Ctx {
  bool ok = true;
  std::string why;
  int count = 0;
  void fail(const std::string& m) {
    ok = false;
    if (count < 8) {
      if (!why.empty()) why += "; ";
      why += m;
    } else if (count == 8) {
      why += "; ...";
    }
    ++count;
  }
};

#define EXPECT(ctx, cond, msg) \
  do {                         \
    if (!(cond)) (ctx).fail(msg); \
  } while (0)

int g_failures = 0;

template <typename Fn>
void run(int idx, const char* label, double budget_s, Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Ctx c;
  try {
    fn(c);
  } catch (const std::exception& e) {
    c.fail(std::string("unexpected exception: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0.0 && secs >= budget_s)
    c.fail("over time budget: " + std::to_string(secs) + "s >= " +
           std::to_string(budget_s) + "s");
  std::printf("[%s] criterion %d: %s (%.2fs)\n", c.ok ? "PASS" : "FAIL", idx, label,
              secs);
  if (!c.ok) std::printf("       %s\n", c.why.c_str());
  if (!c.ok) ++g_failures;
  std::fflush(stdout);
}

std::uint64_t battery_seed() {
  const char* env = std::getenv("KOETHE_SEED");
  if (!env || !*env) return 0;
  return std::strtoull(env, nullptr, 10);
}

struct CatalogEntry {
  std::string label;
  ConditionProfile cond;
  HomologicalProfile prof;
};

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> rows = [] {
    std::vector<CatalogEntry> out;
    auto add = [&out](const std::string& label, const WeightFamily& P) {
      ConditionProfile c = profile_conditions(P, 10000, 8);
      HomologicalProfile h = classify(c);
      out.push_back({label, std::move(c), std::move(h)});
    };
    add("l1", make_builtin("l1", {}));
    add("s", make_builtin("s", {}));
    add("entire", make_builtin("entire", {}));
    add("hadamard_disk(1)", make_builtin("hadamard_disk", {{"R", 1.0}}));
    add("hadamard_disk(2)", make_builtin("hadamard_disk", {{"R", 2.0}}));
    add("matrix_example", make_builtin("matrix_example", {}));
    add("finite_dim(64)", make_builtin("finite_dim", {{"n", 64}}));
    return out;
  }();
  return rows;
}

SeqElement geometric_element(std::uint64_t N) {
  return SeqElement::from_abs_expr(dsl::parse("2^(-i)"), IndexSet::naturals(), N);
}

void criterion_1(Ctx& c) {
  struct Want {
    const char* label;
    Dim dims[4];
  };
  const Want table[] = {
      {"l1", {Dim::two, Dim::two, Dim::two, Dim::two}},
      {"s", {Dim::one, Dim::one, Dim::one, Dim::one}},
      {"entire", {Dim::one, Dim::one, Dim::one, Dim::one}},
      {"hadamard_disk(1)", {Dim::zero, Dim::zero, Dim::zero, Dim::zero}},
      {"hadamard_disk(2)",
       {Dim::infinite_dim, Dim::infinite_dim, Dim::infinite_dim, Dim::infinite_dim}},
      {"matrix_example", {Dim::two, Dim::two, Dim::one, Dim::one}},
      {"finite_dim(64)", {Dim::zero, Dim::zero, Dim::zero, Dim::zero}},
  };
  const auto& cat = catalog();
  if (cat.size() != 7) {
    c.fail("catalog holds " + std::to_string(cat.size()) + " rows, wanted 7");
    return;
  }
  for (std::size_t r = 0; r < 7; ++r) {
    const HomologicalProfile& h = cat[r].prof;
    const Dim got[4] = {h.dg.value, h.db.value, h.wdg.value, h.wdb.value};
    for (int d = 0; d < 4; ++d)
      EXPECT(c, got[d] == table[r].dims[d],
             std::string(table[r].label) + ": dim " + std::to_string(d) + " is " +
                 dim_name(got[d]) + ", wanted " + dim_name(table[r].dims[d]));
  }
  const HomologicalProfile& mx = cat[5].prof;
  EXPECT(c, mx.dg.witness == "lambda(bar(P))",
         "matrix_example strong witness is '" + mx.dg.witness + "'");
  EXPECT(c, mx.db.witness == "lambda(bar(P))",
         "matrix_example db witness is '" + mx.db.witness + "'");
  EXPECT(c, mx.wdg.witness == "C", "matrix_example weak witness is '" + mx.wdg.witness + "'");
  EXPECT(c, mx.wdb.witness == "C", "matrix_example wdb witness is '" + mx.wdb.witness + "'");
  const TrivialityFlags& fd = cat[6].prof.flags;
  const TriBool all[] = {fd.unital,        fd.contractible, fd.amenable,
                         fd.biprojective,  fd.biflat,       fd.approximately_contractible};
  for (int i = 0; i < 6; ++i)
    EXPECT(c, all[i] == TriBool::yes,
           "finite_dim(64) flag " + std::to_string(i) + " is not yes");
}

void criterion_2(Ctx& c) {
  const std::size_t N = 512;
  const CoeffSeq ones = taylor_geometric(N);
  EXPECT(c, ones.size() == N, "ones has wrong length");
  for (std::size_t k = 0; k < ones.size(); ++k)
    EXPECT(c, ones[k] == std::complex<double>(1.0, 0.0),
           "ones[" + std::to_string(k) + "] != 1");

  std::mt19937_64 rng(20250815);
  std::uniform_real_distribution<double> U(-8.0, 8.0);
  for (int trial = 0; trial < 10; ++trial) {
    CoeffSeq f(N);
    for (auto& z : f) z = {U(rng), U(rng)};
    const CoeffSeq h = hadamard_mul(f, ones, N);
    EXPECT(c, h.size() == N, "product has wrong length");
    for (std::size_t k = 0; k < N; ++k)
      EXPECT(c, h[k] == f[k],
             "trial " + std::to_string(trial) + ": coefficient " + std::to_string(k) +
                 " not reproduced bit-exactly");
  }
}

void criterion_3(Ctx& c) {
  const std::pair<const char*, WeightFamily> families[] = {
      {"s", make_builtin("s", {})},
      {"entire", make_builtin("entire", {})},
      {"l1", make_builtin("l1", {})},
      {"hadamard_disk(1)", make_builtin("hadamard_disk", {{"R", 1.0}})},
  };
  for (const auto& [label, P] : families) {
    const MMatrices m = construct_M_matrices(P, 200, 64);
    EXPECT(c, m.exact(), std::string(label) + ": infima not certified");
    EXPECT(c, m.cap() >= 200, std::string(label) + ": cap below 200");
    EXPECT(c, m.row_identity_exact(200),
           std::string(label) + ": alpha + beta != 1 somewhere on the 200-square");
    const std::uint64_t levels = std::min<std::uint64_t>(m.level_cap(), 8);
    for (std::uint64_t k = 1; k <= levels; ++k) {
      EXPECT(c, m.column_bound_exact(k, 200),
             std::string(label) + ": column bound fails at level " + std::to_string(k));
      EXPECT(c, m.transpose_bound_exact(k, 200),
             std::string(label) + ": transpose bound fails at level " + std::to_string(k));
    }
  }
}

void criterion_4(Ctx& c) {
  const WeightFamily s = make_builtin("s", {});
  const SeqElement a = geometric_element(2000);
  std::vector<ApproxIdentityStep> steps;
  for (std::uint64_t n = 10; n <= 100; ++n) steps.push_back(build_un(a, s, 1, n, 10000));

  const ConvergenceReport rep = verify_convergence(a, s, 1, steps, 1e-6L);
  EXPECT(c, rep.rows.size() == 91, "expected 91 rows");
  EXPECT(c, rep.below_epsilon_at_end, "scaled residual still above 1e-6 at n = 100");
  EXPECT(c, rep.rows.back().value <= 1e-6L, "value at n = 100 above 1e-6");
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    EXPECT(c, rep.rows[i].value <= rep.rows[i - 1].value,
           "scaled residual increased at n = " + std::to_string(rep.rows[i].n));
  EXPECT(c, rep.monotone_after_grace, "monotonicity flag not set");

  const LawsonReadReport lr = verify_lawson_read({a}, s, steps, 10000);
  EXPECT(c, lr.cond_iii_exact, "idempotency of the multipliers is not bit-exact");
  EXPECT(c, lr.cond_iv_exact, "commutation with the sample is not bit-exact");
  EXPECT(c, lr.final_max_i < 1e-6L, "residual norm at n = 100 above 1e-6");
  EXPECT(c, lr.final_max_ii < 1e-6L, "scaled product at n = 100 above 1e-6");
}

void criterion_5(Ctx& c) {
  const WeightFamily P = make_builtin("hadamard_disk", {{"R", 0.5}});
  const std::uint64_t k_max = 1100000;
  const NonAlgebraWitness wit = non_algebra_witness(P, k_max);

  EXPECT(c, wit.failing_level == 1, "expected the first level to fail");
  EXPECT(c, wit.indices.size() == k_max, "witness does not reach k_max");
  EXPECT(c, wit.x.support().size() == k_max, "support size mismatch");

  const long double log_1e6 = 6.0L * std::log(10.0L);
  EXPECT(c, wit.square_partial.log() > log_1e6,
         "square seminorm partial does not exceed 1e6");

  for (std::uint64_t lev = 1; lev <= 4; ++lev) {
    LogValue tail = LogValue::zero();
    for (const auto& [rank, coeff] : wit.x.support())
      if (rank > 10000) tail = tail + coeff.magnitude * P.weight_at_rank(lev, rank);
    EXPECT(c, !tail.is_infinite() && tail.log() < -log_1e6,
           "level " + std::to_string(lev) + " tail beyond depth 1e4 not below 1e-6");
  }
}

void criterion_6(Ctx& c) {
  const WeightFamily l1 = make_builtin("l1", {});
  const WeightFamily s = make_builtin("s", {});
  const std::uint64_t depth = 2000;

  std::mt19937_64 rng(battery_seed() + 20250815ULL);
  std::uniform_int_distribution<int> pick_num(1, 7);
  std::uniform_int_distribution<int> pick_exp(2, 6);
  const std::pair<int, int> ratios[] = {{1, 2}, {2, 3}, {3, 5}, {5, 8}, {1, 3}, {3, 4}};
  std::uniform_int_distribution<std::size_t> pick_ratio(0, 5);

  int checked = 0;
  for (int t = 0; t < 200; ++t) {
    std::string text;
    if (t % 2 == 0) {
      const auto [num, den] = ratios[pick_ratio(rng)];
      text = std::to_string(pick_num(rng)) + " * (" + std::to_string(num) + "/" +
             std::to_string(den) + ")^i";
    } else {
      text = std::to_string(pick_num(rng)) + " * i^(-" + std::to_string(pick_exp(rng)) +
             ")";
    }
    const SeqElement a =
        SeqElement::from_abs_expr(dsl::parse(text), IndexSet::naturals(), depth);
    const SeqElement b = square_decompose(a);
    const SeqElement bb = pointwise_mul(b, b);

    // the decomposition squares back to the element, entrywise and in the tail
    bool reproduced = bb.support().size() == a.support().size();
    if (reproduced)
      for (std::size_t k = 0; k < a.support().size(); ++k) {
        const auto& [ra, ca] = a.support()[k];
        const auto& [rb, cb] = bb.support()[k];
        const std::complex<double> va = ca.to_complex();
        const std::complex<double> vb = cb.to_complex();
        if (ra != rb || std::abs(vb - va) > 1e-12 * std::abs(va)) {
          reproduced = false;
          break;
        }
      }
    if (reproduced && a.tail_rule())
      reproduced = std::fabs(static_cast<double>(bb.abs_at(depth + 5).log() -
                                                 a.abs_at(depth + 5).log())) <= 1e-12;
    EXPECT(c, reproduced, text + ": square of the decomposition strays past 1e-12");

    for (const WeightFamily* P : {&l1, &s}) {
      const Verdict direct = sqrt_membership(a, *P, depth);
      const Verdict via = membership(b, *P, depth);
      EXPECT(c, !direct.unknown() && !via.unknown(), text + ": verdict undecided");
      EXPECT(c, direct.holds() == via.holds(),
             text + ": root membership disagrees with the decomposition");
      ++checked;
    }
  }
  EXPECT(c, checked == 400, "sample count mismatch");

  const SeqElement harmonic =
      SeqElement::from_abs_expr(dsl::parse("1/i^2"), IndexSet::naturals(), depth);
  EXPECT(c, membership(harmonic, l1, depth).holds(), "1/i^2 should lie in the space");
  const Verdict root = sqrt_membership(harmonic, l1, depth);
  EXPECT(c, root.fails() && root.exact(), "1/i^2 should have no root in the space");
}

void criterion_7(Ctx& c) {
  const std::uint64_t seed = battery_seed();
  std::mt19937_64 rng(seed + 7ULL);
  std::uniform_int_distribution<int> pick_shape(0, 4);
  std::uniform_int_distribution<int> pick_c(1, 3);

  FamilyFlags flags;
  flags.pointwise_ordered = true;
  flags.monotone_in_index = IndexMonotonicity::nondecreasing;
  flags.all_weights_ge_one = true;

  for (int t = 0; t < 20; ++t) {
    const int shape = pick_shape(rng);
    const int cv = pick_c(rng);
    std::string text;
    switch (shape) {
      case 0: text = "i^(" + std::to_string(cv) + "*k)"; break;
      case 1: text = "(" + std::to_string(cv) + "+i)^k"; break;
      case 2: text = "exp(i*k/" + std::to_string(cv) + ")"; break;
      case 3: text = "2^k"; break;
      default: text = "(log(i+" + std::to_string(cv + 1) + "))^k"; break;
    }
    const WeightFamily P =
        WeightFamily::from_expr(IndexSet::naturals(), dsl::parse(text), flags, text);

    const Verdict vb = check_B(P, 10000, 8);
    EXPECT(c, vb.holds(), text + ": squaring the family left its class");
    const Verdict vn = check_N(P, 10000, 8);
    const Verdict vl = check_log_criterion(P, 10000, 8);
    EXPECT(c, !(vn.holds() && vl.fails()),
           text + ": summability criterion holds but the log bound fails");
    EXPECT(c, !(vn.fails() && vl.holds()),
           text + ": summability criterion fails but the log bound holds");

    const IdempotenceReport rep =
        idempotence_profile(P, 10000, 8, seed + static_cast<std::uint64_t>(t), 16);
    if (vn.holds() || vl.holds())
      for (const IdempotenceSample& smp : rep.samples)
        EXPECT(c, !(smp.in_space.holds() && smp.in_space.exact() &&
                    smp.sqrt_in_space.fails() && smp.sqrt_in_space.exact()),
               text + ": a sample contradicts the positive verdict");
  }

  const WeightFamily l1 = make_builtin("l1", {});
  const IdempotenceReport row = idempotence_profile(l1, 10000, 8, seed, 16);
  EXPECT(c, row.nuclearity.fails() && row.nuclearity.exact(),
         "flat family: summability criterion should fail");
  EXPECT(c, row.log_criterion.fails() && row.log_criterion.exact(),
         "flat family: log bound should fail");
  const SeqElement harmonic =
      SeqElement::from_abs_expr(dsl::parse("1/i^2"), IndexSet::naturals(), 4096);
  EXPECT(c, membership(harmonic, l1, 4096).holds() &&
            sqrt_membership(harmonic, l1, 4096).fails(),
         "flat family: the harmonic sample should refuse a root");
}

void criterion_8(Ctx& c) {
  auto make = [](int o) {
    return o == 0 ? Verdict::holds_exact("synthetic", 1)
                  : Verdict::fails_exact("synthetic", 1);
  };
  int classified = 0;
  int rejected = 0;
  for (int mask = 0; mask < 16; ++mask) {
    ConditionProfile p;
    p.source_name = "synthetic";
    p.depth = 1;
    p.level_budget = 1;
    p.algebra = Verdict::holds_exact("synthetic", 1);
    p.U = make((mask >> 3) & 1);
    p.N = make((mask >> 2) & 1);
    p.B = make((mask >> 1) & 1);
    p.M = make(mask & 1);
    const bool inconsistent =
        p.U.holds() && (p.N.fails() || p.B.fails() || p.M.fails());
    try {
      const HomologicalProfile h = classify(p);
      ++classified;
      EXPECT(c, !inconsistent,
             "combination " + std::to_string(mask) + " should have been rejected");
      EXPECT(c, consistency_check(h).empty(),
             "combination " + std::to_string(mask) + " classifies inconsistently");
    } catch (const PreconditionError&) {
      ++rejected;
      EXPECT(c, inconsistent,
             "combination " + std::to_string(mask) + " was rejected but is consistent");
    }
  }
  EXPECT(c, classified == 9 && rejected == 7, "combination counts drifted");

  for (const CatalogEntry& row : catalog()) {
    const std::vector<std::string> bad = consistency_check(row.prof);
    EXPECT(c, bad.empty(),
           row.label + ": " + (bad.empty() ? std::string() : bad.front()));
    if (row.prof.flags.biprojective == TriBool::yes)
      EXPECT(c,
             row.prof.db.value == Dim::zero || row.prof.db.value == Dim::one ||
                 row.prof.db.value == Dim::two,
             row.label + ": biprojective yet db exceeds 2");
  }
}

}  // namespace

int main() {
  run(1, "golden classification table", 10.0, criterion_1);
  run(2, "componentwise product identity is bit-exact", 0.0, criterion_2);
  run(3, "splitting matrices satisfy the three bounds in log domain", 0.0, criterion_3);
  run(4, "multiplier net converges with exact side conditions", 5.0, criterion_4);
  run(5, "non-algebra witness separates the element from its square", 10.0, criterion_5);
  run(6, "root membership matches the square decomposition on 200 samples", 0.0,
      criterion_6);
  run(7, "summability and log criteria agree across 20 random families", 30.0,
      criterion_7);
  run(8, "classifier is total, consistent, and respects the bidimension bound", 0.0,
      criterion_8);

  std::printf("acceptance: %d of 8 criteria passed\n", 8 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
