#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tabsyn/calculus.hpp"
#include "tabsyn/engine.hpp"
#include "tabsyn/normalize.hpp"

namespace tabsyn {

// Finite L-structure; equality is identity on elements.
struct LStructure {
  int size = 0;
  std::vector<std::string> names;               // element labels
  std::map<Id, int> nu0;                        // sort-0 expression -> element
  std::map<Id, int> terms;                      // ground domain term -> element
  std::map<Id, std::set<std::vector<int>>> nu;  // atomic expression of sort n -> n-tuples
  std::map<Sym, std::set<std::vector<int>>> pred;
};

// Domain variable -> element. Object-language symbols denote themselves.
using Valuation = std::map<Id, int>;

// Compiled evaluator over a fixed specification. Formulae are compiled once and
// evaluated against any structure bound later; holds-atoms on compound
// expressions unfold through the connective definitions and are memoized.
class Evaluator {
 public:
  explicit Evaluator(const NormalizedSpec& ns);

  int compile(const F& f);
  // Free variables of a compiled formula in slot order.
  const std::vector<Id>& free_vars(int handle) const { return formulas_[handle].free; }

  void bind(const LStructure& m);
  bool holds(int handle, const std::vector<int>& free_values);

  // Low-level access used by the oracle.
  void resize(int size);
  int size() const { return size_; }
  const std::vector<Id>& atoms() const { return atom_exprs_; }
  const std::vector<Sym>& preds() const { return pred_syms_; }
  const std::vector<Id>& individuals() const { return nu0_exprs_; }
  std::vector<std::uint8_t>& atom_table(int i) { return atom_tab_[i]; }
  std::vector<std::uint8_t>& pred_table(int i) { return pred_tab_[i]; }
  int arity_of_atom(int i) const { return atom_arity_[i]; }
  int arity_of_pred(int i) const { return pred_arity_[i]; }
  void set_individual(int i, int element) { nu0_val_[i] = element; }
  void clear_memo();
  // Symbols a compiled formula depends on: atoms, then preds, then individuals.
  void dependencies(int handle, std::set<int>& atoms, std::set<int>& preds,
                    std::set<int>& individuals) const;
  LStructure snapshot() const;

 private:
  struct TermRef {
    enum Type : std::uint8_t { Var, Individual, Ground } type;
    int index;
  };
  enum class Op : std::uint8_t { Bot, Top, Eq, Atom, Compound, Pred, Not, And, Or, Imp, Iff, All, Ex };
  struct ENode {
    Op op;
    int index = -1;  // table, compound, or bound slot
    std::vector<TermRef> terms;
    std::vector<int> kids;
  };
  struct Compound {
    int body = -1;
    int arity = 0;
    int slots = 0;
    std::vector<std::int8_t> memo;
  };
  struct Compiled {
    int root = -1;
    int slots = 0;
    std::vector<Id> free;
  };
  struct Scope {
    std::map<Id, int> slot;
    int next = 0;
  };

  int compile_node(const F& f, Scope& sc);
  int compile_atom(Id atom, Scope& sc);
  TermRef compile_term(Id t, Scope& sc);
  int compound_index(Id expr);
  int atom_index(Id expr);
  int pred_index(Sym p, int arity);
  int element(const TermRef& t, const std::vector<int>& env) const;
  std::size_t tuple_index(const std::vector<TermRef>& ts, std::size_t from,
                          const std::vector<int>& env) const;
  bool eval(int n, std::vector<int>& env);
  void deps(int n, std::set<int>& a, std::set<int>& p, std::set<int>& i,
            std::set<int>& seen) const;

  const NormalizedSpec* ns_;
  int size_ = 0;
  std::vector<ENode> nodes_;
  std::vector<Compiled> formulas_;
  std::vector<Compound> compounds_;
  std::map<Id, int> compound_ids_;
  std::vector<Id> compound_exprs_;
  std::map<Id, int> atom_ids_;
  std::vector<Id> atom_exprs_;
  std::vector<int> atom_arity_;
  std::vector<std::vector<std::uint8_t>> atom_tab_;
  std::map<Sym, int> pred_ids_;
  std::vector<Sym> pred_syms_;
  std::vector<int> pred_arity_;
  std::vector<std::vector<std::uint8_t>> pred_tab_;
  std::map<Id, int> nu0_ids_;
  std::vector<Id> nu0_exprs_;
  std::vector<int> nu0_val_;
  std::map<Id, int> ground_ids_;
  std::vector<Id> ground_terms_;
  std::vector<int> ground_val_;
};

bool evaluate(const NormalizedSpec& ns, const LStructure& m, const F& f, const Valuation& v = {});

// First-order literals denoted by a branch literal (identity for first-order calculi).
std::vector<Id> decode_literal(const Calculus& c, Id lit);
// Domain term denoting the root element of a run.
Id root_term(const Calculus& c, Id root_constant);

LStructure extract_model(const Branch& b, const Calculus& c, const NormalizedSpec& ns);

struct ReflectionReport {
  std::size_t checked = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};
ReflectionReport verify_reflection(const NormalizedSpec& ns, const Calculus& c, const LStructure& m,
                                   const std::vector<Id>& literals);

// Reflection, input concepts at the root element, and the background theory
// instantiated over the expressions of the branch.
struct ModelCheck {
  ReflectionReport reflection;
  bool inputs_hold = false;
  std::size_t background_checked = 0;
  std::vector<std::string> background_violations;
  bool ok() const { return reflection.ok() && inputs_hold && background_violations.empty(); }
};
ModelCheck check_model(const NormalizedSpec& ns, const Calculus& c, const LStructure& m,
                       const Branch& b, const Problem& p, Id root_constant);

std::string print_model(const LStructure& m);
LStructure parse_model(const std::string& text, const Signature& sig);

// ---------------------------------------------------------------- oracle

enum class OracleVerdict { Sat, Unsat, Unknown };
std::string oracle_verdict_name(OracleVerdict v);

struct OracleOptions {
  int max_size = 3;
  int max_bits = 40;  // cap on enumerated assignment bits at the largest size
  bool parallel = true;
  // Exhausting the bound counts as unsatisfiable; otherwise the verdict is Unknown.
  bool bound_conclusive = true;
};

struct OracleResult {
  OracleVerdict verdict = OracleVerdict::Unknown;
  LStructure model;
  std::int64_t structures = 0;
  std::string reason;
};

OracleResult brute_force_sat(const NormalizedSpec& ns, const Problem& p, const OracleOptions& opt = {});

}  // namespace tabsyn
