#include <algorithm>

#include "doctest.h"
#include "support.hpp"
#include "tabsyn/engine.hpp"

using namespace tabsyn;
using namespace tabsyn::test;

namespace {

Calculus with_ub(const Calculus& c) { return attach_ub(c, UbConfig{true, 0}); }

Problem problem(const Calculus& c, const std::string& text) { return parse_problem(text, c.sig); }

Id ground_lit(const Calculus& c, const std::string& text) {
  ParseContext ctx;
  ctx.sig = &c.sig;
  ctx.mode = ParseMode::Ground;
  return parse_literal(text, ctx);
}

bool has(const Branch& b, const Calculus& c, const std::string& lit) { return b.contains(ground_lit(c, lit)); }

// Applies every instance of the listed rules until none is left, following the single successor.
std::shared_ptr<Branch> saturate_with(Engine& e, std::shared_ptr<Branch> b, const std::vector<std::string>& ids) {
  for (bool again = true; again;) {
    again = false;
    for (const auto& id : ids) {
      for (const auto& in : e.applicable_instances(*b, e.rule_index(id))) {
        auto next = e.apply(b, in);
        REQUIRE(next.size() == 1);
        b = next[0];
        again = true;
      }
    }
  }
  return b;
}

}  // namespace

TEST_SUITE("engine") {
  TEST_CASE("problem parsing") {
    const Calculus& ipc = synthesized("ipc");
    Problem p = problem(ipc, "# comment\nnot(impl(p, p))\nor(p, q)\n");
    REQUIRE(p.roots.size() == 2);
    CHECK_FALSE(p.roots[0].positive);
    CHECK(p.roots[1].positive);
    Problem s = problem(synthesized("so"), "not(p0)\n");
    REQUIRE(s.roots.size() == 1);
    CHECK(s.roots[0].positive);
    CHECK(print_problem(problem(ipc, print_problem(p))) == print_problem(p));
  }

  TEST_CASE("init seeds the root literals") {
    const Calculus& c = synthesized("so");
    Engine e(c);
    auto b = e.init(problem(c, "p0\nnot(p0)"));
    CHECK(show(e.root_constant()) == "a");
    CHECK(has(*b, c, "nu1(p0, a)"));
    CHECK(has(*b, c, "nu1(not(p0), a)"));
    CHECK(b->terms().size() == 1);

    Engine e2(c);
    auto b2 = e2.init(problem(c, "exists(r0, p0)"));
    CHECK(has(*b2, c, "nu1(exists(r0, p0), a)"));
  }

  TEST_CASE("root constant avoids input names") {
    const Calculus& c = synthesized("so");
    Engine e(c);
    e.init(problem(c, "sing(a)"));
    CHECK(show(e.root_constant()) != "a");
  }

  TEST_CASE("empty input") {
    const Calculus& c = synthesized("so");
    Engine e(c);
    CHECK(error_code([&] { e.init(Problem{}); }) == "EmptyInput");
  }

  TEST_CASE("applicable instances and the applied set") {
    const Calculus& c = synthesized("so");
    Engine e(c);
    auto b = e.init(problem(c, "or(p0, q0)"));
    b = saturate_with(e, b, {"nu1_pred_pos"});
    CHECK(has(*b, c, "eq(a, a)"));
    int rule = e.rule_index("or_pos");
    auto ins = e.applicable_instances(*b, rule);
    REQUIRE(ins.size() == 1);
    CHECK(e.show_instance(ins[0]) == "{p=p0, q=q0, x=a}");
    auto succ = e.apply(b, ins[0]);
    REQUIRE(succ.size() == 2);
    CHECK(has(*succ[0], c, "nu1(p0, a)"));
    CHECK(has(*succ[1], c, "nu1(q0, a)"));
    CHECK(e.applicable_instances(*succ[0], rule).empty());
    CHECK(e.applicable_instances(*succ[1], rule).empty());
  }

  TEST_CASE("refined negative exists binds the successor") {
    const Calculus& c = refined("so");
    Engine e(c);
    auto b = e.init(problem(c, "not(exists(r0, p0))\nexists(r0, sing(b))"));
    auto ins = e.applicable_instances(*b, e.rule_index("exists_neg"));
    REQUIRE(ins.size() == 1);
    auto succ = e.apply(b, ins[0]);
    REQUIRE(succ.size() == 1);
    CHECK(has(*succ[0], c, "holds(colon(b, not(p0)))"));
  }

  TEST_CASE("positive exists introduces a Skolem term") {
    const Calculus& c = synthesized("so");
    Engine e(c);
    auto b = e.init(problem(c, "exists(r0, p0)"));
    auto ins = e.applicable_instances(*b, e.rule_index("exists_pos"));
    REQUIRE(ins.size() == 1);
    auto succ = e.apply(b, ins[0]);
    REQUIRE(succ.size() == 1);
    CHECK(has(*succ[0], c, "nu2(r0, a, sk_exists_1(r0, p0, a))"));
    CHECK(has(*succ[0], c, "nu1(p0, sk_exists_1(r0, p0, a))"));
    CHECK(succ[0]->terms().size() == 2);
  }

  TEST_CASE("closure leaves no successor") {
    const Calculus& c = synthesized("so");
    Engine e(c);
    auto b = e.init(problem(c, "p0\nnot(p0)"));
    b = saturate_with(e, b, {"not_pos"});
    CHECK(has(*b, c, "not(nu1(p0, a))"));
    auto ins = e.applicable_instances(*b, e.rule_index("nu1_clash"));
    REQUIRE(ins.size() == 1);
    CHECK(e.apply(b, ins[0]).empty());
  }

  TEST_CASE("blocking splits on equality") {
    Calculus c = with_ub(synthesized("so"));
    Engine e(c);
    auto b = e.init(problem(c, "exists(r0, p0)"));
    b = saturate_with(e, b, {"exists_pos", "nu1_pred_pos"});
    Id a = e.root_constant();
    Id s = b->terms().at(1);
    auto ins = e.applicable_instances(*b, e.rule_index("ub"));
    auto it = std::find_if(ins.begin(), ins.end(), [&](const Instance& in) {
      return e.show_instance(in) == "{x=a, y=" + show(s) + "}";
    });
    REQUIRE(it != ins.end());
    auto succ = e.apply(b, *it);
    REQUIRE(succ.size() == 2);
    CHECK(succ[0]->contains(c.eq_lit(true, a, s)));
    CHECK(succ[1]->contains(c.eq_lit(false, a, s)));
  }

  TEST_CASE("term order") {
    const Calculus& c = synthesized("so");
    Engine e(c);
    auto b = e.init(problem(c, "exists(r0, p0)\nexists(r0, q0)"));
    b = saturate_with(e, b, {"exists_pos"});
    REQUIRE(b->terms().size() == 3);
    Id a = e.root_constant(), s1 = b->terms()[1], s2 = b->terms()[2];
    CHECK(term_order(*b, a, s1) == -1);
    CHECK(term_order(*b, s1, a) == 1);
    CHECK(term_order(*b, a, a) == 0);
    CHECK(term_order(*b, s1, s2) == -1);
    CHECK(b->birth(a) < b->birth(s1));
    CHECK(error_code([&] { term_order(*b, a, dconst("zz")); }) == "UnknownTerm");
  }

  TEST_CASE("expand: contradiction in the synthesized calculus") {
    const Calculus& c = synthesized("so");
    auto r = prove(c, problem(c, "p0\nnot(p0)"));
    CHECK(r.verdict == Verdict::Unsatisfiable);
    CHECK(r.stats.closed >= 1);
  }

  TEST_CASE("expand: transitivity forces the direct edge") {
    Calculus c = with_ub(refined("so"));
    auto r = prove(c, problem(c, "exists(r0, exists(r0, p0))\nnot(exists(r0, p0))"));
    CHECK(r.verdict == Verdict::Unsatisfiable);
  }

  TEST_CASE("expand: linearity fails intuitionistically") {
    Calculus c = with_ub(refined("ipc"));
    auto r = prove(c, problem(c, "not(or(impl(p, q), impl(q, p)))"));
    REQUIRE(r.verdict == Verdict::Satisfiable);
    REQUIRE(r.branch);
    CHECK(r.branch->saturated());
    CHECK_FALSE(r.branch->closed());
  }

  TEST_CASE("expand: identity is valid intuitionistically") {
    Calculus c = with_ub(refined("ipc"));
    CHECK(prove(c, problem(c, "not(impl(p, p))")).verdict == Verdict::Unsatisfiable);
    Calculus u = with_ub(synthesized("ipc"));
    CHECK(prove(u, problem(u, "not(impl(p, p))")).verdict == Verdict::Unsatisfiable);
  }

  TEST_CASE("search strategies agree") {
    Calculus c = with_ub(refined("so"));
    for (const char* text : {"exists(r0, p0)\nnot(exists(r0, exists(r0, p0)))", "or(p0, q0)\nnot(p0)\nnot(q0)",
                             "exists(r0, or(p0, not(p0)))"}) {
      EngineOptions dfs, bfs;
      bfs.search = Search::BreadthFirst;
      CHECK(prove(c, problem(c, text), dfs).verdict == prove(c, problem(c, text), bfs).verdict);
    }
  }

  TEST_CASE("budget exhaustion") {
    Calculus c = with_ub(refined("ipc"));
    EngineOptions o;
    o.max_applications = 1;
    auto r = prove(c, problem(c, "not(or(impl(p, q), impl(q, p)))"), o);
    CHECK(r.verdict == Verdict::ResourceLimit);
    CHECK(verdict_name(r.verdict) == "UNKNOWN");
  }

  TEST_CASE("trace lines") {
    const Calculus& c = synthesized("so");
    EngineOptions o;
    o.trace = true;
    auto r = prove(c, problem(c, "p0\nnot(p0)"), o);
    REQUIRE_FALSE(r.trace.empty());
    bool applied = false, closed = false;
    for (const auto& line : r.trace) {
      applied |= line.rfind("apply ", 0) == 0;
      closed |= line.rfind("close branch#", 0) == 0;
    }
    CHECK(applied);
    CHECK(closed);
  }

  TEST_CASE("subexpression assertion holds on unrefined runs") {
    Calculus c = with_ub(synthesized("so"));
    const NormalizedSpec& ns = spec_of("so");
    Problem p = problem(c, "exists(r0, or(p0, not(q0)))\nnot(exists(r0, p0))");
    std::vector<Id> exprs;
    for (const auto& r : p.roots) exprs.push_back(r.expr);
    std::set<Id> sub = sub_closure(ns, exprs);
    EngineOptions o;
    o.subexpressions = &sub;
    auto r = prove(c, p, o);
    CHECK(r.verdict == Verdict::Satisfiable);
    CHECK(r.subexpression_violations.empty());
    CHECK(r.blocking_violations.empty());
  }
}
