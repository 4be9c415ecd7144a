#include <algorithm>

#include "doctest.h"
#include "support.hpp"

using namespace tabsyn;
using namespace tabsyn::test;

namespace {

const char* kHeader = R"(sorts
  0 individual: l
  1 concept: p q
  2 role: r
  domain: x y
connectives
  or: 1 1 -> 1
  exists: 2 1 -> 1
)";

NormalizedSpec halves(const std::string& extra) { return normalize(parse_spec(kHeader + extra)); }

}  // namespace

TEST_SUITE("normalize") {
  TEST_CASE("definitions split into halves") {
    const NormalizedSpec& ns = spec_of("so");
    const Signature& sig = ns.sig;
    const Xi* plus = ns.plus_for("or");
    const Xi* minus = ns.minus_for("or");
    REQUIRE(plus);
    REQUIRE(minus);
    CHECK(plus->positive);
    CHECK_FALSE(minus->positive);
    CHECK(formula_equal(plus->sentence(),
                        formula(sig, "forall x. nu1(or(p, q), x) -> or(nu1(p, x), nu1(q, x))")));
    CHECK(formula_equal(minus->sentence(),
                        formula(sig, "forall x. or(nu1(p, x), nu1(q, x)) -> nu1(or(p, q), x)")));
    CHECK(ns.s_plus.size() == 4);
    CHECK(ns.s_minus.size() == 4);
  }

  TEST_CASE("background sentences pass through") {
    const NormalizedSpec& ns = spec_of("so");
    REQUIRE(ns.sb.size() == 1);
    CHECK(formula_equal(ns.sb[0].formula, preset("so").sb[0].formula));
  }

  TEST_CASE("already split input is kept") {
    NormalizedSpec ns = halves(R"(positive
  forall x. nu1(or(p, q), x) -> or(nu1(p, x), nu1(q, x))
  forall x. nu1(exists(r, p), x) -> exists y. and(nu2(r, x, y), nu1(p, y))
negative
  forall x. or(nu1(p, x), nu1(q, x)) -> nu1(or(p, q), x)
)");
    CHECK(ns.s_plus.size() == 2);
    CHECK(ns.s_minus.size() == 1);
    CHECK(ns.s0.empty());
    CHECK(ns.plus_for("exists") != nullptr);
    CHECK(ns.minus_for("exists") == nullptr);
  }

  TEST_CASE("SO ordering is the direct subexpression ordering") {
    const NormalizedSpec& ns = spec_of("so");
    InducedOrdering ord = induced_ordering(ns);
    const Signature& sig = ns.sig;
    Id p = lvar("p", 1), q = lvar("q", 1);
    CHECK(ord.acyclic);
    CHECK(ord.less(p, lapp(sig, "or", {p, q})));
    CHECK(ord.less(q, lapp(sig, "or", {p, q})));
    CHECK(ord.less(p, lapp(sig, "not", {p})));
    CHECK(ord.less(p, lapp(sig, "exists", {lvar("r", 2), p})));
    CHECK_FALSE(ord.less(lapp(sig, "or", {p, q}), p));
    CHECK(check_well_founded(ord).verdict == WfVerdict::ProvedWF);
  }

  TEST_CASE("IPC ordering") {
    const NormalizedSpec& ns = spec_of("ipc");
    InducedOrdering ord = induced_ordering(ns);
    Id p = lvar("p", 1), q = lvar("q", 1);
    for (const char* c : {"and", "or", "impl"}) {
      Id e = lapp(ns.sig, c, {p, q});
      CHECK(ord.less(p, e));
      CHECK(ord.less(q, e));
    }
    CHECK(check_well_founded(ord).verdict == WfVerdict::ProvedWF);
  }

  TEST_CASE("proper subexpression body is well-founded") {
    NormalizedSpec ns = halves(R"(positive
  forall x. nu1(exists(r, exists(r, p)), x) -> nu1(exists(r, p), x)
  forall x. nu1(or(p, q), x) -> or(nu1(p, x), nu1(q, x))
)");
    CHECK(check_well_founded(induced_ordering(ns)).verdict == WfVerdict::ProvedWF);
  }

  TEST_CASE("self loop is detected") {
    NormalizedSpec ns = halves(R"(positive
  forall x. nu1(or(p, q), x) -> nu1(or(p, q), x)
  forall x. nu1(exists(r, p), x) -> exists y. and(nu2(r, x, y), nu1(p, y))
)");
    InducedOrdering ord = induced_ordering(ns);
    CHECK_FALSE(ord.acyclic);
    WfResult wf = check_well_founded(ord);
    CHECK(wf.verdict == WfVerdict::SelfLoopOrCycle);
    CHECK_FALSE(wf.witness.empty());
  }

  TEST_CASE("sub_closure of an input") {
    const NormalizedSpec& ns = spec_of("so");
    Id e = lexpr(ns.sig, "exists(r0, not(p0))", 1);
    std::set<Id> cl = sub_closure(ns, {e});
    CHECK(cl.count(e));
    CHECK(cl.count(lexpr(ns.sig, "not(p0)", 1)));
    CHECK(cl.count(lexpr(ns.sig, "p0", 1)));
    CHECK(cl.count(lexpr(ns.sig, "r0", 2)));
    CHECK_FALSE(cl.count(lexpr(ns.sig, "not(not(p0))", 1)));
  }

  TEST_CASE("SO obligations") {
    auto obs = emit_wd_obligations(spec_of("so"));
    REQUIRE(obs.size() == 5);
    CHECK(obs[0].name == "wd1");
    CHECK(obs[0].predischarged);
    std::set<std::string> names;
    for (const auto& o : obs) {
      names.insert(o.name);
      CHECK(o.filename == o.name + ".p");
      CHECK(check_tptp(o.tptp).empty());
    }
    CHECK(names.count("wd3_exists"));
    CHECK(names.count("wd3_sing"));
  }

  TEST_CASE("exists obligation is a tautology") {
    auto obs = emit_wd_obligations(spec_of("so"));
    auto it = std::find_if(obs.begin(), obs.end(), [](const Obligation& o) { return o.name == "wd3_exists"; });
    REQUIRE(it != obs.end());
    const std::string a = "(? [D_y] : (sort_3(D_y) & (nu2(k_r,D_x,D_y) & nu1(k_p,D_y))))";
    CHECK(it->tptp.find("((" + a + " => " + a + ") & (" + a + " => " + a + "))") != std::string::npos);
  }

  TEST_CASE("IPC obligations") {
    auto obs = emit_wd_obligations(spec_of("ipc"));
    CHECK(obs.size() == 5);
    for (const auto& o : obs) CHECK(check_tptp(o.tptp).empty());
  }

  TEST_CASE("no connectives gives only wd1") {
    NormalizedSpec ns = normalize(parse_spec(R"(sorts
  0 individual: l
  1 concept: p
  domain: x
)"));
    auto obs = emit_wd_obligations(ns);
    REQUIRE(obs.size() == 1);
    CHECK(obs[0].name == "wd1");
  }

  TEST_CASE("TPTP checker rejects malformed input") {
    CHECK_FALSE(check_tptp("fof(a, axiom, p(X).").empty());
    CHECK_FALSE(check_tptp("fof(a, conjecture, ![X] : (p(X) & ).").empty());
    CHECK(check_tptp("fof(a, conjecture, ![X] : (p(X) => p(X))).").empty());
  }
}
