#include "koethe/classifier.hpp"

#include <string>

#include "koethe/errors.hpp"

namespace koethe {

namespace {

TriBool tri(const Verdict& v) {
  if (v.holds()) return TriBool::yes;
  if (v.fails()) return TriBool::no;
  return TriBool::unknown;
}

void reject_inconsistent(const ConditionProfile& c) {
  if (!c.U.holds()) return;
  const char* bad = nullptr;
  if (c.N.fails()) bad = "summable ratios";
  if (c.B.fails()) bad = "the squared-family comparison";
  if (c.M.fails()) bad = "the splitting matrices";
  if (bad)
    throw PreconditionError(std::string("inconsistent condition profile: summable "
                                        "weights force ") +
                            bad + ", which the profile marks as failing; no family "
                                  "produces this combination");
}

DimResult unknown_blocked(const char* cond) {
  return {Dim::unknown,
          std::string("undetermined: the verdict for ") + cond +
              " is needed before a branch can fire",
          ""};
}

}  // namespace

const char* dim_name(Dim d) {
  switch (d) {
    case Dim::zero: return "0";
    case Dim::one: return "1";
    case Dim::two: return "2";
    case Dim::infinite_dim: return "infinity";
    case Dim::unknown: return "unknown";
  }
  return "unknown";
}

const char* tribool_name(TriBool t) {
  switch (t) {
    case TriBool::yes: return "yes";
    case TriBool::no: return "no";
    case TriBool::unknown: return "unknown";
  }
  return "unknown";
}

DimResult classify_weak(const ConditionProfile& c) {
  reject_inconsistent(c);
  if (c.U.holds())
    return {Dim::zero,
            "summable weights make the algebra unital and contractible; every weak "
            "dimension vanishes",
            ""};
  if (c.B.fails())
    return {Dim::infinite_dim,
            "the family is not equivalent to its square, so the flat resolutions of "
            "the one-dimensional module never terminate",
            "C"};
  if (c.B.unknown()) return unknown_blocked("the squared-family comparison (B)");
  if (c.N.fails())
    return {Dim::two,
            "equivalence with the square holds but ratios are never summable; the "
            "defect concentrates on the vanishing-at-infinity subspace, which needs "
            "two flat steps",
            "lambda_inf(P)"};
  if (c.N.unknown()) return unknown_blocked("summable ratios (N)");
  if (c.U.fails())
    return {Dim::one,
            "equivalence with the square and summable ratios hold but the weights "
            "are not summable: the one-dimensional module needs exactly one flat "
            "step",
            "C"};
  return unknown_blocked("summability (U)");
}

DimResult classify_strong(const ConditionProfile& c) {
  reject_inconsistent(c);
  if (c.U.holds())
    return {Dim::zero,
            "summable weights make the algebra unital and contractible; every "
            "projective dimension vanishes",
            ""};
  if (c.B.fails())
    return {Dim::infinite_dim,
            "the family is not equivalent to its square, so the projective "
            "resolutions of the one-dimensional module never terminate",
            "C"};
  if (c.B.unknown()) return unknown_blocked("the squared-family comparison (B)");
  if (c.N.fails())
    return {Dim::two,
            "equivalence with the square holds but ratios are never summable; the "
            "defect concentrates on the vanishing-at-infinity subspace, which needs "
            "two projective steps",
            "lambda_inf(P)"};
  if (c.N.unknown()) return unknown_blocked("summable ratios (N)");
  if (c.M.holds()) {
    if (c.U.fails())
      return {Dim::one,
              "splitting matrices with both sup bounds exist, so the augmentation "
              "sequence splits after one projective step",
              "C"};
    return unknown_blocked("summability (U)");
  }
  if (c.M.fails())
    return {Dim::two,
            "no splitting matrices satisfy both sup bounds; the clipped family's "
            "space realizes the two-step obstruction",
            "lambda(bar(P))"};
  return unknown_blocked("the splitting matrices (M)");
}

TrivialityFlags triviality_flags(const ConditionProfile& c) {
  reject_inconsistent(c);
  TrivialityFlags f;
  f.unital = tri(c.U);
  f.contractible = f.unital;
  f.amenable = f.unital;
  f.biprojective = tri(c.B);
  f.biflat = f.biprojective;
  if (c.B.holds() && c.N.holds())
    f.approximately_contractible = TriBool::yes;
  else if (c.source_name == "l1")
    f.approximately_contractible = TriBool::no;
  return f;
}

HomologicalProfile classify(const ConditionProfile& c) {
  HomologicalProfile h;
  h.dg = classify_strong(c);
  h.db = h.dg;
  h.wdg = classify_weak(c);
  h.wdb = h.wdg;
  h.flags = triviality_flags(c);
  return h;
}

namespace {

nlohmann::json dim_json(const DimResult& d) {
  return {{"value", dim_name(d.value)}, {"case", d.case_text}, {"witness", d.witness}};
}

int dim_rank(Dim d) {
  switch (d) {
    case Dim::zero: return 0;
    case Dim::one: return 1;
    case Dim::two: return 2;
    case Dim::infinite_dim: return 3;
    case Dim::unknown: return -1;
  }
  return -1;
}

}  // namespace

nlohmann::json HomologicalProfile::to_json() const {
  return {{"dg", dim_json(dg)},
          {"db", dim_json(db)},
          {"wdg", dim_json(wdg)},
          {"wdb", dim_json(wdb)},
          {"flags",
           {{"unital", tribool_name(flags.unital)},
            {"contractible", tribool_name(flags.contractible)},
            {"amenable", tribool_name(flags.amenable)},
            {"biprojective", tribool_name(flags.biprojective)},
            {"biflat", tribool_name(flags.biflat)},
            {"approximately_contractible",
             tribool_name(flags.approximately_contractible)}}}};
}

std::vector<std::string> consistency_check(const HomologicalProfile& h) {
  std::vector<std::string> out;
  auto known = [](Dim d) { return d != Dim::unknown; };

  if (known(h.dg.value) && known(h.db.value) && h.dg.value != h.db.value)
    out.push_back("projective global dimension and bidimension disagree");
  if (known(h.wdg.value) && known(h.wdb.value) && h.wdg.value != h.wdb.value)
    out.push_back("weak global dimension and weak bidimension disagree");
  if (known(h.wdg.value) && known(h.dg.value) &&
      dim_rank(h.wdg.value) > dim_rank(h.dg.value))
    out.push_back("weak global dimension exceeds the projective one");
  if (known(h.wdb.value) && known(h.db.value) &&
      dim_rank(h.wdb.value) > dim_rank(h.db.value))
    out.push_back("weak bidimension exceeds the projective bidimension");

  if (h.flags.contractible != h.flags.unital ||
      h.flags.amenable != h.flags.unital)
    out.push_back("unital, contractible and amenable flags disagree");
  if (h.flags.biflat != h.flags.biprojective)
    out.push_back("biprojective and biflat flags disagree");

  if (h.flags.unital == TriBool::yes) {
    for (const DimResult* d : {&h.dg, &h.db, &h.wdg, &h.wdb})
      if (known(d->value) && d->value != Dim::zero) {
        out.push_back("a unital profile carries a nonzero dimension");
        break;
      }
  }
  if (h.flags.biprojective == TriBool::yes && known(h.db.value) &&
      dim_rank(h.db.value) > 2)
    out.push_back("a biprojective profile carries bidimension above two");
  if (h.flags.biflat == TriBool::yes && known(h.wdg.value) &&
      dim_rank(h.wdg.value) > 2)
    out.push_back("a biflat profile carries weak global dimension above two");
  // no wdb bound is asserted from biflatness alone: that implication is open

  return out;
}

}  // namespace koethe
