#pragma once

#include <set>
#include <string>
#include <vector>

#include "tabsyn/syntax.hpp"

namespace tabsyn {

enum class RuleKind { DecompPos, DecompNeg, Theory, Equality, Closure, Blocking };
std::string kind_name(RuleKind k);
RuleKind parse_kind(const std::string& s);

struct Rule {
  std::string id;
  RuleKind kind = RuleKind::Theory;
  std::vector<Id> premises;                   // literal patterns
  std::vector<std::vector<Id>> denominators;  // empty: closure-shaped
  std::vector<std::string> fresh_functions;   // Skolem symbols introduced
  bool produces_terms = false;
  std::string origin;
  std::string note;

  bool is_closure() const { return denominators.empty(); }
};

// Literal templates describing domain equality and root literals of a calculus.
struct EqualityView {
  Id a = kNoId, b = kNoId;  // pattern variables
  Id pos = kNoId, neg = kNoId;
};
struct RootView {
  Id label = kNoId, expr = kNoId;
  Id pos = kNoId, neg = kNoId;
};

// Decoding template for internalized calculi: expr pattern -> FO literal.
struct DecodeEntry {
  std::string pred;  // "nu1", "nu2", "eq", or a predicate name
  bool positive = true;
  std::vector<Id> params;  // expression parameter first for nu_n, then individuals
  Id expr = kNoId;
};

struct UbConfig {
  bool enabled = false;
  int depth = 0;
};

struct Calculus {
  Signature sig;
  std::vector<Rule> rules;
  UbConfig ub;
  bool internalized = false;
  EqualityView eq;
  RootView root;
  std::vector<DecodeEntry> decode;
  std::set<std::string> skolems;  // Skolem function / connective names
  std::vector<std::string> notes;

  int domain_sort() const { return internalized ? 0 : kDomainSort; }
  const Rule* find(const std::string& id) const;
  Rule* find(const std::string& id);
  // Domain-sort equality literal between two terms.
  Id eq_lit(bool positive, Id a, Id b) const;
  // Matches a literal against the equality view; returns (a, b) on success.
  bool match_eq(Id lit, bool positive, Id& a, Id& b) const;
  Id root_lit(bool positive, Id expr, Id label) const;
};

// Default views for a first-order calculus over sig.
void set_default_views(Calculus& c);

std::string print_calculus(const Calculus& c);
Calculus parse_calculus(const std::string& text);
std::string print_rule(const Rule& r);

// Canonical renaming: one line per rule, sorted, ids dropped, kinds kept.
std::vector<std::string> canonical_form(const Calculus& c);
// Differences between two calculi in canonical form (empty means equal).
std::vector<std::string> canonical_diff(const Calculus& a, const Calculus& b);

// Variables occurring in a node, in order of first occurrence.
void ordered_vars(Id n, std::vector<Id>& out);
bool is_var_node(Id n);
// A premise t = t over a single variable.
bool is_domain_predication(const Calculus& c, Id lit);

}  // namespace tabsyn
