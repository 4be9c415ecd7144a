#include <algorithm>

#include "doctest.h"
#include "support.hpp"
#include "tabsyn/corpus.hpp"

using namespace tabsyn;
using namespace tabsyn::test;

namespace {

int nesting(Id e) {
  int d = 0;
  for (Id a : node(e).args) d = std::max(d, nesting(a));
  return node(e).kind == Kind::LApp && !node(e).args.empty() ? d + 1 : d;
}

std::string corpus_text(const std::string& logic) {
  return read_file(std::string(TABSYN_SOURCE_DIR) + "/tests/corpus/" + logic + ".txt");
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("parse and print") {
    auto entries = parse_corpus("# header\nx-1 SAT p0 ; not(p1)\n\nx-2 UNSAT p0\n");
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].id == "x-1");
    CHECK(entries[0].expected == "SAT");
    CHECK(entries[0].roots == std::vector<std::string>{"p0", "not(p1)"});
    CHECK(entries[0].problem_text() == "p0\nnot(p1)\n");
    CHECK(print_corpus(entries) == "x-1 SAT p0 ; not(p1)\nx-2 UNSAT p0\n");
    CHECK(error_code([] { parse_corpus("x-3 SAT\n"); }) == "SyntaxError");
  }

  TEST_CASE("frozen corpora reprint byte for byte") {
    for (const char* logic : {"so", "ipc"}) {
      std::string text = corpus_text(logic);
      auto entries = parse_corpus(text);
      CHECK(entries.size() == 300);
      CHECK(print_corpus(entries) == text);
    }
  }

  TEST_CASE("generator is deterministic") {
    for (const char* logic : {"so", "ipc"}) {
      GenOptions o;
      o.logic = logic;
      o.seed = 7;
      CHECK(random_problems(o, 25) == random_problems(o, 25));
      GenOptions other = o;
      other.seed = 8;
      CHECK(random_problems(o, 25) != random_problems(other, 25));
    }
  }

  TEST_CASE("generator respects the depth bound") {
    for (const char* logic : {"so", "ipc"}) {
      for (int depth : {1, 2, 4}) {
        GenOptions o;
        o.logic = logic;
        o.seed = 3;
        o.max_depth = depth;
        const Signature& sig = spec_of(logic).sig;
        for (const auto& roots : random_problems(o, 200)) {
          CHECK(!roots.empty());
          if (std::string(logic) == "ipc") {
            REQUIRE(roots.size() == 1);
            REQUIRE(roots[0].rfind("not(", 0) == 0);
            CHECK(nesting(lexpr(sig, roots[0].substr(4, roots[0].size() - 5), 1)) <= depth);
            continue;
          }
          // SO leaves may carry one negation or a nominal.
          for (const auto& r : roots) CHECK(nesting(lexpr(sig, r, 1)) <= depth + 1);
        }
      }
    }
    GenOptions bad;
    bad.max_depth = 0;
    CHECK(error_code([&] { random_problems(bad, 1); }) == "InvalidBound");
  }

  TEST_CASE("intuitionistic validity") {
    const Signature& sig = spec_of("ipc").sig;
    auto valid = [&](const std::string& f) { return ipc_valid(lexpr(sig, f, 1)); };
    CHECK(valid("impl(p0, p0)"));
    CHECK(valid("impl(and(p0, p1), p0)"));
    CHECK(valid("impl(bot, p0)"));
    CHECK(valid("impl(impl(or(p0, impl(p0, bot)), bot), bot)"));
    CHECK(valid("impl(or(p0, p1), or(p1, p0))"));
    CHECK(valid("impl(impl(p0, impl(p1, p2)), impl(and(p0, p1), p2))"));
    CHECK_FALSE(valid("or(p0, impl(p0, bot))"));
    CHECK_FALSE(valid("impl(impl(impl(p0, p1), p0), p0)"));
    CHECK_FALSE(valid("or(impl(p0, p1), impl(p1, p0))"));
    CHECK_FALSE(valid("impl(impl(impl(p0, bot), bot), p0)"));
    CHECK_FALSE(valid("p0"));
  }

  TEST_CASE("IPC corpus labels match validity") {
    const Signature& sig = spec_of("ipc").sig;
    for (const auto& e : parse_corpus(corpus_text("ipc"))) {
      REQUIRE(e.roots.size() == 1);
      Id root = lexpr(sig, e.roots[0].substr(4, e.roots[0].size() - 5), 1);
      CHECK_MESSAGE((e.expected == "UNSAT") == ipc_valid(root), e.id);
    }
  }
}
