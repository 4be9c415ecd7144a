#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace tabsyn {

using Id = std::int32_t;
using Sym = std::int32_t;

constexpr int kDomainSort = -1;
constexpr int kNoSort = -2;
constexpr Id kNoId = -1;

class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Interned symbol names.
Sym intern(const std::string& s);
const std::string& name_of(Sym s);

enum class Kind : std::uint8_t {
  LVar,     // object-language variable, sort >= 0
  LConst,   // object-language constant
  LApp,     // connective application
  DVar,     // domain variable
  DConst,   // domain constant
  DFun,     // domain function application (Skolem or declared)
  Nu0,      // nu0(individual)
  PVar,     // compiled pattern variable (sym = slot)
  Atom,     // positive atom: sym = predicate
  NegAtom,  // negated atom
  Inst,     // rule instance fingerprint
};

struct Node {
  Kind kind;
  Sym sym;
  int sort;
  std::vector<Id> args;
};

// Hash-consed node store shared by every module. Reads of existing nodes are
// lock-free; creation is serialized.
Id mk(Kind kind, Sym sym, int sort, std::vector<Id> args = {});
const Node& node(Id id);
std::size_t store_size();

inline bool is_lexpr(Id id) {
  Kind k = node(id).kind;
  return k == Kind::LVar || k == Kind::LConst || k == Kind::LApp;
}
inline bool is_domain_term(Id id) {
  Kind k = node(id).kind;
  return k == Kind::DVar || k == Kind::DConst || k == Kind::DFun || k == Kind::Nu0;
}
inline bool is_literal(Id id) {
  Kind k = node(id).kind;
  return k == Kind::Atom || k == Kind::NegAtom;
}
inline int sort_of_node(Id id) { return node(id).sort; }

// Well-known predicate symbols.
Sym sym_eq();
Sym sym_holds();
Sym sym_bot();
Sym sym_nu(int n);
int nu_index(Sym pred);  // n for nu_n, -1 otherwise

// Literal helpers.
Id mk_atom(Sym pred, std::vector<Id> args);
Id mk_lit(bool positive, Sym pred, std::vector<Id> args);
Id negate(Id lit);     // flips polarity
Id complement(Id lit); // the ~ operator: same as negate on literals
bool positive(Id lit);
Id atom_of(Id lit);
Id bot_lit();
Id top_lit();
bool is_bot(Id lit);
bool is_top(Id lit);

struct Connective {
  std::string name;
  std::vector<int> arg_sorts;
  int result_sort = 1;
};

struct FunctionSym {
  std::string name;
  std::vector<int> arg_sorts;  // kDomainSort for domain arguments
  bool skolem = false;
};

struct Predicate {
  std::string name;
  int arity = 0;
};

struct Signature {
  int max_sort = 1;  // N
  std::map<int, std::string> sort_names;
  std::vector<Connective> connectives;
  std::map<std::string, int> lvars;   // variable name -> sort
  std::map<std::string, int> lconsts; // constant name -> sort
  std::vector<std::string> lvar_order;
  std::vector<std::string> domain_vars;
  std::vector<FunctionSym> functions;
  std::vector<Predicate> predicates;

  const Connective* connective(const std::string& n) const;
  const FunctionSym* function(const std::string& n) const;
  const Predicate* predicate(const std::string& n) const;
  bool is_domain_var(const std::string& n) const;
  void add_connective(Connective c);
  void add_function(FunctionSym f);
  void add_predicate(Predicate p);
  void validate() const;
  std::vector<int> used_nu_sorts() const;  // sorts 1..N
};

// L-expression constructors.
Id lvar(const std::string& name, int sort);
Id lconst(const std::string& name, int sort);
Id lapp(const Signature& sig, const std::string& conn, std::vector<Id> args);
Id dvar(const std::string& name);
Id dconst(const std::string& name);
Id dfun(const std::string& name, std::vector<Id> args);
Id nu0(Id individual);

// sort_of: returns the sort or throws IllSorted.
int sort_of(const Signature& sig, Id e);

// First-order formulae of the meta-language.
enum class FKind { Atom, Not, And, Or, Implies, Iff, Forall, Exists, Bot, Top };

struct Formula;
using F = std::shared_ptr<const Formula>;

struct Formula {
  FKind kind;
  Id atom = kNoId;          // for Atom: a positive atom node
  std::vector<F> kids;
  std::vector<Id> vars;     // for quantifiers: bound variable nodes
};

F f_atom(Id atom);
F f_lit(Id lit);
F f_not(F a);
F f_and(std::vector<F> ks);
F f_or(std::vector<F> ks);
F f_implies(F a, F b);
F f_iff(F a, F b);
F f_forall(std::vector<Id> vs, F body);
F f_exists(std::vector<Id> vs, F body);
F f_bot();
F f_top();

bool formula_equal(const F& a, const F& b);

// Substitution of L-variables (and optionally domain variables) inside nodes.
using Binding = std::map<Id, Id>;
Id substitute(Id target, const Binding& b);
F substitute(const F& f, const Binding& b);
// Checks that each bound expression has its variable's sort.
void check_binding(const Signature& sig, const Binding& b);
// One-way matching: LVar and DVar nodes of the pattern are variables.
bool match_vars(Id pattern, Id target, Binding& b);

// Collect subterms.
void collect_lvars(Id n, std::set<Id>& out);
void collect_lvars(const F& f, std::set<Id>& out);
void collect_dvars(Id n, std::set<Id>& out);
void collect_free_dvars(const F& f, std::set<Id>& out);
void collect_lexprs(Id n, std::set<Id>& out);         // maximal L-expressions
void collect_all_lexprs(Id n, std::set<Id>& out);     // every L-subexpression
void collect_lexprs(const F& f, std::set<Id>& out);
void collect_atoms(const F& f, std::vector<Id>& out);
bool contains_connective(const F& f, const std::string& conn);
bool has_lsort_quantifier(const F& f);

bool is_l_open_sentence(const F& f);

// S restricted to X: all substitution instances of members of S whose every
// L-expression lies in X.
std::vector<F> restrict_to(const std::vector<F>& sentences, const std::set<Id>& x);

// Printing.
std::string show(Id n);
std::string show(const F& f);

// Parsing.
enum class ParseMode {
  Schematic,  // unknown identifiers become variables of the expected sort
  Ground,     // unknown identifiers become constants of the expected sort
  Strict,     // unknown identifiers are errors
};

struct ParseContext {
  const Signature* sig = nullptr;
  ParseMode mode = ParseMode::Schematic;
  // extra variable-name scoping for rule files
  std::map<std::string, int> local_sorts;
};

F parse_formula(const std::string& text, const ParseContext& ctx);
Id parse_lexpr(const std::string& text, const ParseContext& ctx, int expected_sort);
Id parse_literal(const std::string& text, const ParseContext& ctx);
Id parse_term(const std::string& text, const ParseContext& ctx);

// Low-level tokenizer shared by the file-format parsers.
struct Token {
  enum Type { Ident, Punct, End } type;
  std::string text;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string text, int line0 = 1);
  const Token& peek(int k = 0);
  Token next();
  bool accept(const std::string& punct);
  void expect(const std::string& punct);
  bool at_end();
  [[noreturn]] void fail(const std::string& msg);

 private:
  void scan();
  std::string text_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int line0_;
};

class Parser {
 public:
  Parser(Lexer& lx, const ParseContext& ctx) : lx_(lx), ctx_(ctx) {}
  F formula();
  Id lexpr(int expected_sort);
  Id term();
  Id literal();
  Id atom_or_literal(bool allow_neg);

 private:
  F iff_level();
  F imp_level();
  F primary();
  Id atom();
  Id any_arg(int& sort_out);
  Lexer& lx_;
  const ParseContext& ctx_;
  std::vector<std::set<std::string>> bound_;
};

}  // namespace tabsyn
