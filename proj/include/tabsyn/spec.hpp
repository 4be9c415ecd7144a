#pragma once

#include <string>
#include <vector>

#include "tabsyn/syntax.hpp"

namespace tabsyn {

// A connective definition: forall xs. head <-> body, head = nu_n(sigma(ps), xs).
struct Definition {
  std::string name;
  std::string connective;
  std::vector<Id> qvars;  // domain variables bound by the outer quantifier
  Id head = kNoId;        // positive nu_n atom
  F body;
  F sentence() const;
};

// A named sentence of the background theory or a pre-split half-definition.
struct Sentence {
  std::string name;
  F formula;
};

struct SemanticSpec {
  Signature sig;
  std::vector<Definition> s0;
  std::vector<Sentence> sb;
  // Optional pre-split halves: forall xs. head -> body and forall xs. body -> head.
  std::vector<Sentence> s_plus;
  std::vector<Sentence> s_minus;
  // The default equality axioms are always part of the specification; they are
  // kept symbolic and materialized as equality rules during synthesis.
  bool default_equality = true;
};

SemanticSpec parse_spec(const std::string& text);
std::string print_spec(const SemanticSpec& spec);
SemanticSpec preset(const std::string& name);
std::string preset_text(const std::string& name);

// Splits a pre-split sentence "forall xs. A -> B" into (qvars, A, B).
struct Implication {
  std::vector<Id> qvars;
  F antecedent;
  F consequent;
};
Implication split_implication(const F& f);

// Reads a whole file; throws Error("IOError") on failure.
std::string read_file(const std::string& path);

}  // namespace tabsyn
