#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tabsyn/spec.hpp"

namespace tabsyn {

// One half of a definition: forall xs. head -> body (positive) or body -> head.
struct Xi {
  std::string name;        // connective name or a user label
  std::string connective;  // empty when the head is not a plain connective pattern
  bool positive = true;
  std::vector<Id> qvars;
  Id head = kNoId;  // positive nu_n atom
  F body;
  Id head_expr() const { return node(head).args[0]; }
  F sentence() const;
};

struct NormalizedSpec {
  Signature sig;
  std::vector<Xi> s_plus;
  std::vector<Xi> s_minus;
  std::vector<Sentence> sb;
  std::vector<Definition> s0;
  bool default_equality = true;

  const Xi* plus_for(const std::string& conn) const;
  const Xi* minus_for(const std::string& conn) const;
  // The defining body for a connective, used for evaluating compound expressions.
  // Returns the S0 body when present, otherwise the positive half.
  std::optional<std::pair<Id, F>> definition_of(Sym conn) const;  // (head atom, body)
};

NormalizedSpec normalize(const SemanticSpec& spec);

struct InducedOrdering {
  // (smaller, larger) over schematic expressions harvested from the bodies.
  std::vector<std::pair<Id, Id>> edges;
  bool acyclic = true;
  bool less(Id a, Id b) const;  // schematic edge query up to transitivity
};

InducedOrdering induced_ordering(const NormalizedSpec& ns);

enum class WfVerdict { ProvedWF, SelfLoopOrCycle, Unknown };
struct WfResult {
  WfVerdict verdict = WfVerdict::Unknown;
  std::string witness;
};
WfResult check_well_founded(const InducedOrdering& ord);

// Every ground expression reachable from the inputs by the induced ordering,
// including the inputs and all their L-subexpressions.
std::set<Id> sub_closure(const NormalizedSpec& ns, const std::vector<Id>& exprs);

struct Obligation {
  std::string name;      // "wd1" or "wd3_<connective>"
  std::string filename;  // name + ".p"
  std::string tptp;
  bool predischarged = false;
};

std::vector<Obligation> emit_wd_obligations(const NormalizedSpec& ns);

// Checks a TPTP FOF problem against the grammar subset emitted above.
// Returns a list of error messages; empty means valid.
std::vector<std::string> check_tptp(const std::string& text);

}  // namespace tabsyn
