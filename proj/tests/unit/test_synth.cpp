#include <algorithm>

#include "doctest.h"
#include "support.hpp"

using namespace tabsyn;
using namespace tabsyn::test;

namespace {

std::string rule_text(const Calculus& c, const std::string& id) {
  const Rule* r = c.find(id);
  return r ? print_rule(*r) : "<missing " + id + ">";
}

std::set<std::string> ids_of(const std::vector<Rule>& rs) {
  std::set<std::string> out;
  for (const auto& r : rs) out.insert(r.id);
  return out;
}

int count_kind(const Calculus& c, RuleKind k) {
  return static_cast<int>(std::count_if(c.rules.begin(), c.rules.end(), [&](const Rule& r) { return r.kind == k; }));
}

std::set<std::string> shown(const std::vector<Id>& lits) {
  std::set<std::string> out;
  for (Id l : lits) out.insert(show(l));
  return out;
}

const char* kMinimal = R"(sorts
  0 individual: l
  1 concept: p
  domain: x y z
connectives
  sing: 0 -> 1
define
  forall x. nu1(sing(l), x) <-> eq(nu0(l), x)
)";

const char* kEmpty = R"(sorts
  0 individual: l
  1 concept: p
  domain: x y z
)";

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("normal forms") {
    const Signature& sig = spec_of("so").sig;
    F f = nnf(formula(sig, "not(and(nu1(p, x), or(nu1(q, x), not(nu1(p, x)))))"));
    auto m = clean_matrix(dnf(f, 64));
    REQUIRE(m.size() == 2);
    std::set<std::set<std::string>> got;
    for (const auto& conj : m) got.insert(shown(conj));
    CHECK(got == std::set<std::set<std::string>>{{"not(nu1(p, x))"}, {"nu1(p, x)", "not(nu1(q, x))"}});
    CHECK(error_code([&] {
            dnf(nnf(formula(sig, "and(or(nu1(p, x), nu1(q, x)), or(nu1(p, y), nu1(q, y)))")), 2);
          }) == "DnfTooLarge");
  }

  TEST_CASE("implicational form of the positive exists half") {
    const NormalizedSpec& ns = spec_of("so");
    Signature sig = ns.sig;
    SkolemNamer names;
    ImplicationalForm f = implicational_form(*ns.plus_for("exists"), sig, names);
    CHECK(show(f.head) == "nu1(exists(r, p), x)");
    REQUIRE(f.matrix.size() == 1);
    CHECK(shown(f.matrix[0]) ==
          std::set<std::string>{"nu2(r, x, sk_exists_1(r, p, x))", "nu1(p, sk_exists_1(r, p, x))"});
    REQUIRE(f.skolems.size() == 1);
    CHECK(f.skolems[0].name == "sk_exists_1");
    CHECK(f.skolems[0].arg_sorts == std::vector<int>{2, 1, kDomainSort});
  }

  TEST_CASE("implicational form of the negative exists half") {
    const NormalizedSpec& ns = spec_of("so");
    Signature sig = ns.sig;
    SkolemNamer names;
    ImplicationalForm f = implicational_form(*ns.minus_for("exists"), sig, names);
    CHECK(show(f.head) == "not(nu1(exists(r, p), x))");
    REQUIRE(f.matrix.size() == 2);
    std::set<std::set<std::string>> got;
    for (const auto& conj : f.matrix) got.insert(shown(conj));
    CHECK(got == std::set<std::set<std::string>>{{"not(nu2(r, x, y))"}, {"not(nu1(p, y))"}});
    CHECK(f.skolems.empty());
  }

  TEST_CASE("implicational form of the positive not half") {
    const NormalizedSpec& ns = spec_of("so");
    Signature sig = ns.sig;
    SkolemNamer names;
    ImplicationalForm f = implicational_form(*ns.plus_for("not"), sig, names);
    CHECK(show(f.head) == "nu1(not(p), x)");
    REQUIRE(f.matrix.size() == 1);
    CHECK(shown(f.matrix[0]) == std::set<std::string>{"not(nu1(p, x))"});
  }

  TEST_CASE("decomposition rules") {
    const Calculus& so = synthesized("so");
    CHECK(rule_text(so, "exists_neg") ==
          "rule exists_neg [decomposition-]: not(nu1(exists(r, p), x)), eq(y, y) / not(nu2(r, x, y)) | "
          "not(nu1(p, y))");
    CHECK(rule_text(so, "exists_pos") ==
          "rule exists_pos [decomposition+]: nu1(exists(r, p), x) / nu2(r, x, sk_exists_1(r, p, x)), "
          "nu1(p, sk_exists_1(r, p, x))");
    CHECK(so.find("exists_pos")->produces_terms);
    CHECK_FALSE(so.find("exists_neg")->produces_terms);

    const Calculus& ipc = synthesized("ipc");
    CHECK(rule_text(ipc, "impl_neg") ==
          "rule impl_neg [decomposition-]: not(nu1(impl(p, q), x)) / R(x, sk_impl_1(p, q, x)), "
          "nu1(p, sk_impl_1(p, q, x)), not(nu1(q, sk_impl_1(p, q, x)))");
    const Rule* bot = ipc.find("bot_pos");
    REQUIRE(bot);
    CHECK(bot->is_closure());
    CHECK(rule_text(ipc, "bot_pos") == "rule bot_pos [decomposition+]: nu1(bot, x) / bot");
  }

  TEST_CASE("theory rules") {
    CHECK(rule_text(synthesized("so"), "transitivity") ==
          "rule transitivity [theory]: eq(r, r), eq(x, x), eq(y, y), eq(z, z) / not(nu2(r, x, y)) | "
          "not(nu2(r, y, z)) | nu2(r, x, z)");
    const Calculus& ipc = synthesized("ipc");
    CHECK(rule_text(ipc, "reflexivity") == "rule reflexivity [theory]: eq(x, x) / R(x, x)");
    CHECK(rule_text(ipc, "antisymmetry") ==
          "rule antisymmetry [theory]: eq(x, x), eq(y, y) / not(R(x, y)) | not(R(y, x)) | eq(x, y)");
  }

  TEST_CASE("equality rules") {
    const Calculus& so = synthesized("so");
    auto eq = default_equality_rules(so.sig);
    CHECK(eq.size() == 12);
    CHECK(ids_of(eq).count("sk_exists_1_cong_1"));
    CHECK(ids_of(eq).count("nu2_cong_2"));
    CHECK(default_equality_rules(synthesized("ipc").sig).size() == 12);
    Calculus none = synthesize(normalize(parse_spec(kEmpty)));
    for (const auto& r : none.rules) CHECK(r.id.find("sk_") == std::string::npos);
  }

  TEST_CASE("closure rules") {
    auto closures = [](const Calculus& c) {
      std::set<std::string> out;
      for (const auto& r : c.rules)
        if (r.kind == RuleKind::Closure) out.insert(r.id);
      return out;
    };
    CHECK(closures(synthesized("so")) == std::set<std::string>{"nu1_clash", "nu2_clash", "eq_clash"});
    CHECK(closures(synthesized("ipc")) == std::set<std::string>{"nu1_clash", "R_clash"});
    CHECK(closures(synthesize(normalize(parse_spec(kMinimal)))) ==
          std::set<std::string>{"nu1_clash", "eq_clash"});
  }

  TEST_CASE("rule counts by kind") {
    const Calculus& so = synthesized("so");
    CHECK(count_kind(so, RuleKind::DecompPos) + count_kind(so, RuleKind::DecompNeg) == 8);
    CHECK(count_kind(so, RuleKind::Theory) == 1);
    CHECK(count_kind(so, RuleKind::Equality) == 12);
    CHECK(count_kind(so, RuleKind::Closure) == 3);
    const Calculus& ipc = synthesized("ipc");
    CHECK(count_kind(ipc, RuleKind::Theory) == 4);
    CHECK(ipc.rules.size() == 26);
  }

  TEST_CASE("spec without connectives gives equality and closure rules only") {
    Calculus c = synthesize(normalize(parse_spec(kEmpty)));
    for (const auto& r : c.rules) CHECK((r.kind == RuleKind::Equality || r.kind == RuleKind::Closure));
    CHECK(c.rules.size() == 8);
  }

  TEST_CASE("synthesis matches the golden calculi") {
    for (auto [logic, file] : {std::pair{"so", "so"}, std::pair{"ipc", "ipc"}}) {
      Calculus golden = parse_calculus(read_file(std::string(TABSYN_SOURCE_DIR) + "/golden/" + file + ".calc"));
      CHECK(canonical_diff(synthesized(logic), golden).empty());
    }
  }

  TEST_CASE("printing is deterministic and reparses") {
    std::string a = print_calculus(synthesize(spec_of("so")));
    std::string b = print_calculus(synthesize(spec_of("so")));
    CHECK(a == b);
    CHECK(canonical_diff(parse_calculus(a), synthesized("so")).empty());
  }
}
