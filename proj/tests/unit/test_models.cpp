#include <cstring>
#include <functional>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "tabsyn/engine.hpp"
#include "tabsyn/models.hpp"

using namespace tabsyn;
using namespace tabsyn::test;

namespace {

Calculus with_ub(const Calculus& c) { return attach_ub(c, UbConfig{true, 0}); }

Problem problem(const Signature& sig, const std::string& text) { return parse_problem(text, sig); }

F at(const Signature& sig, const std::string& text, const std::string& var = "x") {
  return f_atom(mk_atom(sym_nu(1), {lexpr(sig, text, 1), dvar(var)}));
}

bool holds_at(const NormalizedSpec& ns, const LStructure& m, const std::string& text, int e) {
  return evaluate(ns, m, at(ns.sig, text), {{dvar("x"), e}});
}

// Direct concept semantics over a structure, used as a reference for evaluate.
struct Reference {
  std::vector<std::set<int>> atoms;   // p0, p1
  std::set<std::pair<int, int>> r0;
  int o0 = 0;

  bool eval(const std::string& c, std::size_t& i, int e) const {
    auto word = [&] {
      std::size_t j = i;
      while (j < c.size() && std::isalnum(static_cast<unsigned char>(c[j]))) ++j;
      std::string w = c.substr(i, j - i);
      i = j;
      return w;
    };
    auto skip = [&](const char* s) {
      while (c[i] == ' ') ++i;
      REQUIRE(c.compare(i, std::strlen(s), s) == 0);
      i += std::strlen(s);
      while (i < c.size() && c[i] == ' ') ++i;
    };
    std::string w = word();
    if (w == "p0" || w == "p1") return atoms[w[1] - '0'].count(e) > 0;
    if (w == "sing") {
      skip("(");
      word();
      skip(")");
      return o0 == e;
    }
    if (w == "not") {
      skip("(");
      bool v = eval(c, i, e);
      skip(")");
      return !v;
    }
    if (w == "or") {
      skip("(");
      bool a = eval(c, i, e);
      skip(",");
      bool b = eval(c, i, e);
      skip(")");
      return a || b;
    }
    REQUIRE(w == "exists");
    skip("(");
    word();
    skip(",");
    std::size_t start = i, end = i;
    bool any = false;
    for (auto [u, v] : r0) {
      if (u != e) continue;
      std::size_t k = start;
      any |= eval(c, k, v);
      end = k;
    }
    if (end == start) {
      // Parse the operand once to advance even when there are no successors.
      std::size_t k = start;
      eval(c, k, 0);
      end = k;
    }
    i = end;
    skip(")");
    return any;
  }
};

std::string random_concept(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth == 0 ? 2 : 5);
  switch (pick(rng)) {
    case 0:
      return "p0";
    case 1:
      return "p1";
    case 2:
      return "sing(o0)";
    case 3:
      return "not(" + random_concept(rng, depth - 1) + ")";
    case 4:
      return "or(" + random_concept(rng, depth - 1) + ", " + random_concept(rng, depth - 1) + ")";
    default:
      return "exists(r0, " + random_concept(rng, depth - 1) + ")";
  }
}

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("evaluate concepts") {
    const NormalizedSpec& ns = spec_of("so");
    LStructure m = parse_model("domain: w\nnu1 p0: w\n", ns.sig);
    CHECK(m.size == 1);
    CHECK(holds_at(ns, m, "or(p0, q0)", 0));
    CHECK_FALSE(holds_at(ns, m, "not(p0)", 0));
    CHECK_FALSE(holds_at(ns, m, "exists(r0, p0)", 0));
  }

  TEST_CASE("transitivity holds without chains") {
    const NormalizedSpec& ns = spec_of("so");
    LStructure m = parse_model("domain: u v\nnu2 r0: (u,v)\n", ns.sig);
    F ax = substitute(ns.sb[0].formula, Binding{{lvar("r", 2), lexpr(ns.sig, "r0", 2)}});
    CHECK(evaluate(ns, m, ax));
    LStructure chain = parse_model("domain: u v w\nnu2 r0: (u,v) (v,w)\n", ns.sig);
    CHECK_FALSE(evaluate(ns, chain, ax));
  }

  TEST_CASE("monotonicity fails without persistence") {
    const NormalizedSpec& ns = spec_of("ipc");
    const Sentence* mono = nullptr;
    for (const auto& s : ns.sb)
      if (s.name == "monotonicity") mono = &s;
    REQUIRE(mono);
    F inst = substitute(mono->formula, Binding{{lvar("p", 1), lexpr(ns.sig, "p0", 1)}});
    LStructure m0 = parse_model("domain: u v\nR: (u,u) (u,v) (v,v)\nnu1 p0: u\n", ns.sig);
    CHECK_FALSE(evaluate(ns, m0, inst));
    LStructure ok = parse_model("domain: u v\nR: (u,u) (u,v) (v,v)\nnu1 p0: u v\n", ns.sig);
    CHECK(evaluate(ns, ok, inst));
  }

  TEST_CASE("intuitionistic implication") {
    const NormalizedSpec& ns = spec_of("ipc");
    LStructure fork = parse_model("domain: e0 e1 e2\nR: (e0,e0) (e0,e1) (e0,e2) (e1,e1) (e2,e2)\nnu1 p: e1\nnu1 q: e2\n",
                                  ns.sig);
    CHECK_FALSE(holds_at(ns, fork, "or(impl(p, q), impl(q, p))", 0));
    CHECK(holds_at(ns, fork, "impl(p, p)", 0));
    CHECK_FALSE(holds_at(ns, fork, "bot", 0));
  }

  TEST_CASE("evaluate agrees with direct concept semantics") {
    const NormalizedSpec& ns = spec_of("so");
    std::mt19937 rng(20240611);
    int checked = 0;
    for (int round = 0; round < 1000; ++round) {
      int n = 1 + static_cast<int>(rng() % 3);
      Reference ref;
      ref.atoms.resize(2);
      std::ostringstream text;
      text << "domain:";
      for (int e = 0; e < n; ++e) text << " e" << e;
      text << "\n";
      for (int a = 0; a < 2; ++a) {
        std::string line;
        for (int e = 0; e < n; ++e)
          if (rng() % 2) {
            ref.atoms[a].insert(e);
            line += " e" + std::to_string(e);
          }
        if (!line.empty()) text << "nu1 p" << a << ":" << line << "\n";
      }
      std::string edges;
      for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
          if (rng() % 3 == 0) {
            ref.r0.insert({u, v});
            edges += " (e" + std::to_string(u) + ",e" + std::to_string(v) + ")";
          }
      if (!edges.empty()) text << "nu2 r0:" << edges << "\n";
      ref.o0 = static_cast<int>(rng() % n);
      text << "nu0 o0: e" << ref.o0 << "\n";
      LStructure m = parse_model(text.str(), ns.sig);
      std::string c = random_concept(rng, 3);
      for (int e = 0; e < n; ++e) {
        std::size_t i = 0;
        bool want = ref.eval(c, i, e);
        CHECK_MESSAGE(holds_at(ns, m, c, e) == want, c << " at e" << e << "\n" << text.str());
        ++checked;
      }
    }
    CHECK(checked >= 1000);
  }

  TEST_CASE("model print and parse") {
    const NormalizedSpec& ns = spec_of("so");
    std::string text = "domain: e0 e1\nnu1 p0: e0\nnu2 r0: (e0,e1)\nnu0 o0: e1\n";
    LStructure m = parse_model(text, ns.sig);
    std::string once = print_model(m);
    CHECK(print_model(parse_model(once, ns.sig)) == once);
    CHECK(error_code([&] { parse_model("domain: e0\nnu1 p0: e7\n", ns.sig); }) == "SyntaxError");
  }

  TEST_CASE("extracted model merges equal terms") {
    const Calculus& c = synthesized("so");
    const NormalizedSpec& ns = spec_of("so");
    Problem p = problem(c.sig, "p0\nsing(b)");
    auto r = prove(c, p);
    REQUIRE(r.verdict == Verdict::Satisfiable);
    LStructure m = extract_model(*r.branch, c, ns);
    CHECK(m.size == 1);
    CHECK(holds_at(ns, m, "p0", 0));
    CHECK(holds_at(ns, m, "sing(b)", 0));
    CHECK(check_model(ns, c, m, *r.branch, p, r.root_constant).ok());
  }

  TEST_CASE("refined SO calculus without blocking gives a two element model") {
    const Calculus& c = refined("so");
    const NormalizedSpec& ns = spec_of("so");
    Problem p = problem(c.sig, "exists(r0, p0)");
    auto r = prove(c, p);
    REQUIRE(r.verdict == Verdict::Satisfiable);
    LStructure m = extract_model(*r.branch, c, ns);
    CHECK(m.size == 2);
    Id root = lexpr(ns.sig, "r0", 2);
    REQUIRE(m.nu.count(root));
    REQUIRE(m.nu.at(root).size() == 1);
    auto edge = *m.nu.at(root).begin();
    CHECK(edge[0] != edge[1]);
    CHECK(holds_at(ns, m, "p0", edge[1]));
    ModelCheck mc = check_model(ns, c, m, *r.branch, p, r.root_constant);
    CHECK(mc.ok());
    CHECK(mc.reflection.checked > 0);
  }

  TEST_CASE("KE disjunction rule loses both disjuncts") {
    Calculus ke = refine_rule(synthesized("so"), "or_pos", {0}, false, true);
    const NormalizedSpec& ns = spec_of("so");
    auto r = prove(ke, problem(ke.sig, "or(p0, q0)"));
    REQUIRE(r.verdict == Verdict::Satisfiable);
    LStructure m = extract_model(*r.branch, ke, ns);
    CHECK_FALSE(holds_at(ns, m, "p0", 0));
    CHECK_FALSE(holds_at(ns, m, "q0", 0));
  }

  TEST_CASE("reflection detects a missing atom") {
    const Calculus& c = synthesized("so");
    const NormalizedSpec& ns = spec_of("so");
    auto r = prove(c, problem(c.sig, "p0"));
    REQUIRE(r.verdict == Verdict::Satisfiable);
    LStructure m = extract_model(*r.branch, c, ns);
    CHECK(verify_reflection(ns, c, m, r.branch->literals()).ok());
    m.nu.erase(lexpr(ns.sig, "p0", 1));
    ReflectionReport rep = verify_reflection(ns, c, m, r.branch->literals());
    CHECK(rep.violations.size() == 1);
    ReflectionReport empty = verify_reflection(ns, c, m, {});
    CHECK(empty.ok());
    CHECK(empty.checked == 0);
  }

  TEST_CASE("reflection on saturated refined branches") {
    for (const char* logic : {"so", "ipc"}) {
      Calculus c = with_ub(refined(logic));
      const NormalizedSpec& ns = spec_of(logic);
      std::string text = std::string(logic) == "so" ? "exists(r0, or(p0, not(p1)))\nnot(exists(r0, p0))"
                                                    : "not(or(impl(p, q), impl(q, p)))";
      Problem p = problem(c.sig, text);
      auto r = prove(c, p);
      REQUIRE(r.verdict == Verdict::Satisfiable);
      LStructure m = extract_model(*r.branch, c, ns);
      CHECK(check_model(ns, c, m, *r.branch, p, r.root_constant).ok());
    }
  }

  TEST_CASE("oracle on known problems") {
    OracleOptions two;
    two.max_size = 2;
    CHECK(brute_force_sat(spec_of("ipc"), problem(spec_of("ipc").sig, "not(impl(p, p))"), two).verdict ==
          OracleVerdict::Unsat);
    OracleResult so = brute_force_sat(spec_of("so"), problem(spec_of("so").sig, "exists(r0, exists(r0, p0))\nnot(exists(r0, p0))"));
    CHECK(so.verdict == OracleVerdict::Unsat);
    CHECK(brute_force_sat(spec_of("so"), problem(spec_of("so").sig, "p0\nnot(p0)")).verdict == OracleVerdict::Unsat);

    OracleResult fork = brute_force_sat(spec_of("ipc"), problem(spec_of("ipc").sig, "not(or(impl(p, q), impl(q, p)))"));
    REQUIRE(fork.verdict == OracleVerdict::Sat);
    CHECK(fork.model.size == 3);
    CHECK_FALSE(holds_at(spec_of("ipc"), fork.model, "or(impl(p, q), impl(q, p))", 0));
    CHECK(oracle_verdict_name(OracleVerdict::Unsat) == "UNSAT");
  }

  TEST_CASE("oracle bound can be inconclusive") {
    OracleOptions o;
    o.bound_conclusive = false;
    CHECK(brute_force_sat(spec_of("so"), problem(spec_of("so").sig, "p0\nnot(p0)"), o).verdict ==
          OracleVerdict::Unknown);
  }

  TEST_CASE("oracle carrier cap") {
    OracleOptions o;
    o.max_bits = 2;
    CHECK(error_code([&] {
            brute_force_sat(spec_of("so"), problem(spec_of("so").sig, "exists(r0, exists(r0, p0))\nnot(p1)"), o);
          }) == "CarrierTooLarge");
  }

  TEST_CASE("serial and parallel oracle agree") {
    const char* so_cases[] = {"exists(r0, p0)\nnot(exists(r0, exists(r0, p0)))", "exists(r0, exists(r0, p0))\nnot(exists(r0, p0))",
                              "or(p0, p1)\nnot(p0)\nexists(r0, not(p1))", "sing(o0)\nexists(r0, sing(o0))\nnot(exists(r0, p0))"};
    for (const char* text : so_cases) {
      OracleOptions serial, parallel;
      serial.parallel = false;
      Problem p = problem(spec_of("so").sig, text);
      OracleResult a = brute_force_sat(spec_of("so"), p, serial);
      OracleResult b = brute_force_sat(spec_of("so"), p, parallel);
      CHECK(a.verdict == b.verdict);
      CHECK(a.model.size == b.model.size);
    }
    OracleOptions serial, parallel;
    serial.parallel = false;
    Problem p = problem(spec_of("ipc").sig, "not(impl(impl(impl(p, q), p), p))");
    CHECK(brute_force_sat(spec_of("ipc"), p, serial).verdict == brute_force_sat(spec_of("ipc"), p, parallel).verdict);
  }
}
