#pragma once

#include <string>
#include <vector>

#include "tabsyn/calculus.hpp"
#include "tabsyn/normalize.hpp"

namespace tabsyn {

struct SynthOptions {
  std::size_t dnf_cap = 4096;
  bool assume_well_founded = false;
};

struct ImplicationalForm {
  Id head = kNoId;                         // head literal
  std::vector<std::vector<Id>> matrix;     // disjunction of conjunctions
  std::vector<FunctionSym> skolems;
};

// Negation normal form; quantifiers kept.
F nnf(const F& f, bool negated = false);
// Disjunctive normal form of a quantifier-free NNF formula.
std::vector<std::vector<Id>> dnf(const F& f, std::size_t cap);
// Drops tautological conjunctions and duplicate literals.
std::vector<std::vector<Id>> clean_matrix(std::vector<std::vector<Id>> m);

class SkolemNamer {
 public:
  std::string next(const std::string& origin);

 private:
  std::map<std::string, int> counters_;
};

ImplicationalForm implicational_form(const Xi& xi, Signature& sig, SkolemNamer& names,
                                     std::size_t cap = 4096);

Rule make_decomposition_rule(const Xi& xi, Signature& sig, SkolemNamer& names,
                             std::size_t cap = 4096);
Rule make_theory_rule(const Sentence& s, Signature& sig, SkolemNamer& names,
                      std::size_t cap = 4096);
std::vector<Rule> default_equality_rules(const Signature& sig);
std::vector<Rule> closure_rules(const Signature& sig, const std::vector<Rule>& logical);

Calculus synthesize(const NormalizedSpec& ns, const SynthOptions& opt = {});

}  // namespace tabsyn
