#include "doctest.h"
#include "support.hpp"

using namespace tabsyn;
using namespace tabsyn::test;

namespace {

const char* kSelfRef = R"(sorts
  0 individual: l
  1 concept: p q
  domain: x y
connectives
  or: 1 1 -> 1
define
  forall x. nu1(or(p, q), x) <-> nu1(or(q, p), x)
)";

std::set<std::string> connectives_of(const SemanticSpec& s) {
  std::set<std::string> out;
  for (const auto& d : s.s0) out.insert(d.connective);
  return out;
}

}  // namespace

TEST_SUITE("spec") {
  TEST_CASE("bundled SO specification") {
    SemanticSpec s = parse_spec(preset_text("so"));
    CHECK(connectives_of(s) == std::set<std::string>{"sing", "not", "or", "exists"});
    REQUIRE(s.sb.size() == 1);
    CHECK(s.sb[0].name == "transitivity");
    CHECK(s.sig.max_sort == 2);
    CHECK(s.default_equality);
  }

  TEST_CASE("bundled IPC specification") {
    SemanticSpec s = preset("ipc");
    CHECK(connectives_of(s) == std::set<std::string>{"bot", "and", "or", "impl"});
    CHECK(s.sb.size() == 4);
    REQUIRE(s.sig.predicate("R") != nullptr);
    CHECK(s.sig.predicate("R")->arity == 2);
  }

  TEST_CASE("unknown preset") {
    CHECK(error_code([] { preset("k5"); }) == "UnknownPreset");
  }

  TEST_CASE("self-referential definition is rejected") {
    CHECK(error_code([] { parse_spec(kSelfRef); }) == "ConnectiveSelfReference");
  }

  TEST_CASE("missing definition is rejected") {
    std::string text = preset_text("so");
    text.replace(text.find("  forall x. nu1(not(p), x)"), std::string("  forall x. nu1(not(p), x) <-> not(nu1(p, x))\n").size(), "");
    CHECK(error_code([&] { parse_spec(text); }) == "UndefinedConnective");
  }

  TEST_CASE("print and reparse is stable") {
    for (const char* logic : {"so", "ipc"}) {
      SemanticSpec a = preset(logic);
      std::string once = print_spec(a);
      std::string twice = print_spec(parse_spec(once));
      CHECK(once == twice);
    }
  }

  TEST_CASE("split_implication") {
    const Signature& sig = preset("so").sig;
    Implication imp = split_implication(formula(sig, "forall x. nu1(not(p), x) -> not(nu1(p, x))"));
    CHECK(imp.qvars.size() == 1);
    CHECK(formula_equal(imp.antecedent, formula(sig, "nu1(not(p), x)")));
    CHECK(formula_equal(imp.consequent, formula(sig, "not(nu1(p, x))")));
  }

  TEST_CASE("read_file reports missing files") {
    CHECK(error_code([] { read_file("/nonexistent/file.spec"); }) == "IOError");
  }
}
