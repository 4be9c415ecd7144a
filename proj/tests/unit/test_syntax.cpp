#include <set>

#include "doctest.h"
#include "support.hpp"

using namespace tabsyn;
using namespace tabsyn::test;

TEST_SUITE("syntax") {
  TEST_CASE("sort_of on the SO signature") {
    const Signature& sig = spec_of("so").sig;
    Id l = lvar("l", 0);
    CHECK(sort_of(sig, lapp(sig, "sing", {l})) == 1);
    CHECK(sort_of(sig, lvar("p", 1)) == 1);
    CHECK(sort_of(sig, lvar("r", 2)) == 2);
    CHECK(sort_of(sig, lexpr(sig, "exists(r0, not(p0))", 1)) == 1);
    CHECK(error_code([&] { lapp(sig, "or", {l, lvar("p", 1)}); }) == "IllSorted");
    CHECK(error_code([&] { lexpr(sig, "or(l, p0)", 1); }) == "IllSorted");
  }

  TEST_CASE("hash consing shares equal nodes") {
    const Signature& sig = spec_of("so").sig;
    CHECK(lexpr(sig, "or(p0, q0)", 1) == lexpr(sig, "or(p0, q0)", 1));
    CHECK(lexpr(sig, "or(p0, q0)", 1) != lexpr(sig, "or(q0, p0)", 1));
  }

  TEST_CASE("substitute replaces L-variables") {
    const Signature& sig = spec_of("so").sig;
    Id p = lvar("p", 1), q = lvar("q", 1);
    F e = formula(sig, "nu1(exists(r, p), x)");
    F want = formula(sig, "nu1(exists(r, or(p, q)), x)");
    CHECK(formula_equal(substitute(e, Binding{{p, lapp(sig, "or", {p, q})}}), want));
    CHECK(formula_equal(substitute(e, Binding{}), e));

    Id p1 = lvar("p1", 1), p2 = lvar("p2", 1);
    F phi = f_atom(mk_atom(sym_nu(1), {lapp(sig, "or", {p1, p2}), dvar("x")}));
    Binding b{{p1, lapp(sig, "not", {p})}, {p2, lapp(sig, "not", {q})}};
    CHECK(formula_equal(substitute(phi, b), formula(sig, "nu1(or(not(p), not(q)), x)")));
  }

  TEST_CASE("check_binding rejects sort mismatches") {
    const Signature& sig = spec_of("so").sig;
    Binding bad{{lvar("p", 1), lvar("r", 2)}};
    CHECK_THROWS_AS(check_binding(sig, bad), Error);
    CHECK_NOTHROW(check_binding(sig, Binding{{lvar("p", 1), lvar("q", 1)}}));
  }

  TEST_CASE("L-open sentences") {
    const Signature& sig = spec_of("so").sig;
    CHECK_FALSE(is_l_open_sentence(formula(sig, "forall y. and(nu1(exists(r, p), y), nu2(r, x, y))")));
    CHECK(is_l_open_sentence(formula(sig, "forall y. and(nu1(exists(r, p), y), forall x. nu2(r, x, y))")));
    CHECK_FALSE(is_l_open_sentence(formula(sig, "forall p. forall y. nu1(p, y)")));
  }

  TEST_CASE("restriction to a set of expressions") {
    const Signature& sig = spec_of("so").sig;
    std::vector<F> s{formula(sig, "nu1(exists(r, p), y)"), formula(sig, "nu1(not(p), x)")};
    std::set<Id> x{lexpr(sig, "r0", 2), lexpr(sig, "p0", 1), lvar("p", 1), lexpr(sig, "or(p, p0)", 1),
                   lexpr(sig, "exists(r0, p0)", 1)};
    auto out = restrict_to(s, x);
    REQUIRE(out.size() == 1);
    CHECK(formula_equal(out[0], formula(sig, "nu1(exists(r0, p0), y)", ParseMode::Ground)));
    CHECK(restrict_to(s, {}).empty());
    CHECK(restrict_to({}, x).empty());
  }

  TEST_CASE("parse errors carry a code") {
    const Signature& sig = spec_of("so").sig;
    CHECK(error_code([&] { formula(sig, "nu1(p, "); }) == "SyntaxError");
    CHECK(error_code([&] { formula(sig, "frob(p, x)", ParseMode::Strict); }) != "");
  }

  TEST_CASE("literal helpers") {
    Id a = mk_atom(sym_nu(1), {lvar("p", 1), dvar("x")});
    Id n = negate(a);
    CHECK(positive(a));
    CHECK_FALSE(positive(n));
    CHECK(negate(n) == a);
    CHECK(atom_of(n) == a);
    CHECK(complement(a) == n);
    CHECK(is_bot(bot_lit()));
    CHECK(nu_index(sym_nu(2)) == 2);
    CHECK(nu_index(sym_eq()) == -1);
  }
}
