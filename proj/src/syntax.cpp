#include "tabsyn/syntax.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <functional>
#include <mutex>
#include <shared_mutex>
#include <sstream>

namespace tabsyn {

namespace {

struct SymbolTable {
  std::shared_mutex mu;
  std::unordered_map<std::string, Sym> ids;
  std::deque<std::string> names;
};

SymbolTable& symbols() {
  static SymbolTable t;
  return t;
}

struct Key {
  Kind kind;
  Sym sym;
  int sort;
  std::vector<Id> args;
  bool operator==(const Key& o) const {
    return kind == o.kind && sym == o.sym && sort == o.sort && args == o.args;
  }
};

struct KeyHash {
  std::size_t operator()(const Key& k) const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](std::uint64_t v) {
      h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    mix(static_cast<std::uint64_t>(k.kind));
    mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.sym)));
    mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.sort)));
    for (Id a : k.args) mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)));
    return static_cast<std::size_t>(h);
  }
};

class Store {
 public:
  static constexpr int kChunkBits = 14;
  static constexpr std::size_t kChunkSize = std::size_t{1} << kChunkBits;
  static constexpr std::size_t kMaxChunks = std::size_t{1} << 16;

  Store() : chunks_(new std::atomic<Node*>[kMaxChunks]) {
    for (std::size_t i = 0; i < kMaxChunks; ++i) chunks_[i].store(nullptr);
  }

  Id make(Kind kind, Sym sym, int sort, std::vector<Id>&& args) {
    Key key{kind, sym, sort, std::move(args)};
    {
      std::shared_lock lock(mu_);
      auto it = map_.find(key);
      if (it != map_.end()) return it->second;
    }
    std::unique_lock lock(mu_);
    auto it = map_.find(key);
    if (it != map_.end()) return it->second;
    std::size_t id = size_.load(std::memory_order_relaxed);
    std::size_t c = id >> kChunkBits;
    if (c >= kMaxChunks) throw Error("StoreFull", "node store exhausted");
    Node* chunk = chunks_[c].load(std::memory_order_relaxed);
    if (!chunk) {
      chunk = new Node[kChunkSize];
      chunks_[c].store(chunk, std::memory_order_release);
    }
    chunk[id & (kChunkSize - 1)] = Node{key.kind, key.sym, key.sort, key.args};
    size_.store(id + 1, std::memory_order_release);
    map_.emplace(std::move(key), static_cast<Id>(id));
    return static_cast<Id>(id);
  }

  const Node& get(Id id) const {
    auto u = static_cast<std::size_t>(id);
    return chunks_[u >> kChunkBits].load(std::memory_order_acquire)[u & (kChunkSize - 1)];
  }

  std::size_t size() const { return size_.load(std::memory_order_acquire); }

 private:
  std::unique_ptr<std::atomic<Node*>[]> chunks_;
  std::atomic<std::size_t> size_{0};
  std::shared_mutex mu_;
  std::unordered_map<Key, Id, KeyHash> map_;
};

Store& the_store() {
  static Store s;
  return s;
}

}  // namespace

Sym intern(const std::string& s) {
  auto& t = symbols();
  {
    std::shared_lock lock(t.mu);
    auto it = t.ids.find(s);
    if (it != t.ids.end()) return it->second;
  }
  std::unique_lock lock(t.mu);
  auto it = t.ids.find(s);
  if (it != t.ids.end()) return it->second;
  Sym id = static_cast<Sym>(t.names.size());
  t.names.push_back(s);
  t.ids.emplace(s, id);
  return id;
}

const std::string& name_of(Sym s) {
  auto& t = symbols();
  std::shared_lock lock(t.mu);
  return t.names.at(static_cast<std::size_t>(s));
}

Id mk(Kind kind, Sym sym, int sort, std::vector<Id> args) {
  return the_store().make(kind, sym, sort, std::move(args));
}

const Node& node(Id id) { return the_store().get(id); }

std::size_t store_size() { return the_store().size(); }

Sym sym_eq() {
  static const Sym s = intern("eq");
  return s;
}
Sym sym_holds() {
  static const Sym s = intern("holds");
  return s;
}
Sym sym_bot() {
  static const Sym s = intern("bot");
  return s;
}
Sym sym_nu(int n) { return intern("nu" + std::to_string(n)); }

int nu_index(Sym pred) {
  const std::string& n = name_of(pred);
  if (n.size() < 3 || n[0] != 'n' || n[1] != 'u') return -1;
  for (std::size_t i = 2; i < n.size(); ++i)
    if (n[i] < '0' || n[i] > '9') return -1;
  return std::stoi(n.substr(2));
}

Id mk_atom(Sym pred, std::vector<Id> args) {
  return mk(Kind::Atom, pred, kNoSort, std::move(args));
}

Id mk_lit(bool pos, Sym pred, std::vector<Id> args) {
  return mk(pos ? Kind::Atom : Kind::NegAtom, pred, kNoSort, std::move(args));
}

Id negate(Id lit) {
  const Node& n = node(lit);
  if (n.kind == Kind::Atom) return mk(Kind::NegAtom, n.sym, n.sort, n.args);
  if (n.kind == Kind::NegAtom) return mk(Kind::Atom, n.sym, n.sort, n.args);
  throw Error("NotALiteral", show(lit));
}

Id complement(Id lit) { return negate(lit); }

bool positive(Id lit) { return node(lit).kind == Kind::Atom; }

Id atom_of(Id lit) {
  const Node& n = node(lit);
  if (n.kind == Kind::Atom) return lit;
  return mk(Kind::Atom, n.sym, n.sort, n.args);
}

Id bot_lit() { return mk_atom(sym_bot(), {}); }
Id top_lit() { return mk_lit(false, sym_bot(), {}); }
bool is_bot(Id lit) { return lit == bot_lit(); }
bool is_top(Id lit) { return lit == top_lit(); }

// ---------------------------------------------------------------- Signature

const Connective* Signature::connective(const std::string& n) const {
  for (const auto& c : connectives)
    if (c.name == n) return &c;
  return nullptr;
}

const FunctionSym* Signature::function(const std::string& n) const {
  for (const auto& f : functions)
    if (f.name == n) return &f;
  return nullptr;
}

const Predicate* Signature::predicate(const std::string& n) const {
  for (const auto& p : predicates)
    if (p.name == n) return &p;
  return nullptr;
}

bool Signature::is_domain_var(const std::string& n) const {
  return std::find(domain_vars.begin(), domain_vars.end(), n) != domain_vars.end();
}

void Signature::add_connective(Connective c) {
  if (connective(c.name)) throw Error("DuplicateConnective", c.name);
  connectives.push_back(std::move(c));
}

void Signature::add_function(FunctionSym f) {
  if (function(f.name)) throw Error("DuplicateFunction", f.name);
  functions.push_back(std::move(f));
}

void Signature::add_predicate(Predicate p) {
  if (predicate(p.name)) throw Error("DuplicatePredicate", p.name);
  predicates.push_back(std::move(p));
}

void Signature::validate() const {
  if (!sort_names.count(0) || !sort_names.count(1))
    throw Error("BadSignature", "sorts 0 and 1 must be declared");
  std::set<std::string> names;
  for (const auto& c : connectives) {
    if (!names.insert(c.name).second) throw Error("DuplicateConnective", c.name);
    for (int s : c.arg_sorts)
      if (!sort_names.count(s))
        throw Error("BadSignature", "connective " + c.name + " uses undeclared sort " +
                                        std::to_string(s));
    if (!sort_names.count(c.result_sort))
      throw Error("BadSignature", "connective " + c.name + " has undeclared result sort");
  }
}

std::vector<int> Signature::used_nu_sorts() const {
  std::vector<int> out;
  for (const auto& [s, _] : sort_names)
    if (s >= 1) out.push_back(s);
  return out;
}

// ---------------------------------------------------------------- constructors

Id lvar(const std::string& name, int sort) { return mk(Kind::LVar, intern(name), sort); }
Id lconst(const std::string& name, int sort) { return mk(Kind::LConst, intern(name), sort); }

Id lapp(const Signature& sig, const std::string& conn, std::vector<Id> args) {
  const Connective* c = sig.connective(conn);
  if (!c) throw Error("UndefinedConnective", conn);
  if (c->arg_sorts.size() != args.size())
    throw Error("IllSorted", conn + " expects " + std::to_string(c->arg_sorts.size()) +
                                 " arguments");
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (!is_lexpr(args[i]) || node(args[i]).sort != c->arg_sorts[i])
      throw Error("IllSorted", "argument " + std::to_string(i + 1) + " of " + conn +
                                   " must have sort " + std::to_string(c->arg_sorts[i]));
  }
  return mk(Kind::LApp, intern(conn), c->result_sort, std::move(args));
}

Id dvar(const std::string& name) { return mk(Kind::DVar, intern(name), kDomainSort); }
Id dconst(const std::string& name) { return mk(Kind::DConst, intern(name), kDomainSort); }
Id dfun(const std::string& name, std::vector<Id> args) {
  return mk(Kind::DFun, intern(name), kDomainSort, std::move(args));
}
Id nu0(Id individual) {
  if (!is_lexpr(individual) || node(individual).sort != 0)
    throw Error("IllSorted", "nu0 expects an individual");
  return mk(Kind::Nu0, intern("nu0"), kDomainSort, {individual});
}

int sort_of(const Signature& sig, Id e) {
  const Node& n = node(e);
  switch (n.kind) {
    case Kind::LVar:
    case Kind::LConst:
      return n.sort;
    case Kind::LApp: {
      const Connective* c = sig.connective(name_of(n.sym));
      if (!c) throw Error("UndefinedConnective", name_of(n.sym));
      if (c->arg_sorts.size() != n.args.size())
        throw Error("IllSorted", "arity mismatch at " + name_of(n.sym));
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        int s = sort_of(sig, n.args[i]);
        if (s != c->arg_sorts[i])
          throw Error("IllSorted", "position " + std::to_string(i + 1) + " of " +
                                       name_of(n.sym));
      }
      return c->result_sort;
    }
    case Kind::DVar:
    case Kind::DConst:
    case Kind::DFun:
    case Kind::Nu0:
      return kDomainSort;
    default:
      throw Error("IllSorted", "not an expression");
  }
}

// ---------------------------------------------------------------- formulae

namespace {
F make_f(FKind k, Id atom, std::vector<F> kids, std::vector<Id> vars = {}) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->atom = atom;
  f->kids = std::move(kids);
  f->vars = std::move(vars);
  return f;
}
}  // namespace

F f_atom(Id atom) {
  if (node(atom).kind != Kind::Atom) throw Error("NotAnAtom", show(atom));
  if (atom == bot_lit()) return f_bot();
  return make_f(FKind::Atom, atom, {});
}
F f_lit(Id lit) {
  if (is_top(lit)) return f_top();
  if (positive(lit)) return f_atom(lit);
  return f_not(f_atom(atom_of(lit)));
}
F f_not(F a) { return make_f(FKind::Not, kNoId, {std::move(a)}); }
F f_and(std::vector<F> ks) {
  if (ks.empty()) return f_top();
  if (ks.size() == 1) return ks[0];
  return make_f(FKind::And, kNoId, std::move(ks));
}
F f_or(std::vector<F> ks) {
  if (ks.empty()) return f_bot();
  if (ks.size() == 1) return ks[0];
  return make_f(FKind::Or, kNoId, std::move(ks));
}
F f_implies(F a, F b) { return make_f(FKind::Implies, kNoId, {std::move(a), std::move(b)}); }
F f_iff(F a, F b) { return make_f(FKind::Iff, kNoId, {std::move(a), std::move(b)}); }
F f_forall(std::vector<Id> vs, F body) {
  if (vs.empty()) return body;
  return make_f(FKind::Forall, kNoId, {std::move(body)}, std::move(vs));
}
F f_exists(std::vector<Id> vs, F body) {
  if (vs.empty()) return body;
  return make_f(FKind::Exists, kNoId, {std::move(body)}, std::move(vs));
}
F f_bot() { return make_f(FKind::Bot, kNoId, {}); }
F f_top() { return make_f(FKind::Top, kNoId, {}); }

bool formula_equal(const F& a, const F& b) {
  if (a->kind != b->kind || a->atom != b->atom || a->vars != b->vars ||
      a->kids.size() != b->kids.size())
    return false;
  for (std::size_t i = 0; i < a->kids.size(); ++i)
    if (!formula_equal(a->kids[i], b->kids[i])) return false;
  return true;
}

// ---------------------------------------------------------------- substitution

Id substitute(Id target, const Binding& b) {
  if (b.empty()) return target;
  auto it = b.find(target);
  if (it != b.end()) return it->second;
  const Node& n = node(target);
  if (n.args.empty()) return target;
  std::vector<Id> args;
  args.reserve(n.args.size());
  bool changed = false;
  for (Id a : n.args) {
    Id s = substitute(a, b);
    changed |= (s != a);
    args.push_back(s);
  }
  if (!changed) return target;
  return mk(n.kind, n.sym, n.sort, std::move(args));
}

F substitute(const F& f, const Binding& b) {
  if (b.empty()) return f;
  switch (f->kind) {
    case FKind::Atom:
      return f_atom(substitute(f->atom, b));
    case FKind::Bot:
    case FKind::Top:
      return f;
    case FKind::Forall:
    case FKind::Exists: {
      Binding inner = b;
      for (Id v : f->vars) inner.erase(v);
      F body = substitute(f->kids[0], inner);
      return make_f(f->kind, kNoId, {body}, f->vars);
    }
    default: {
      std::vector<F> ks;
      for (const auto& k : f->kids) ks.push_back(substitute(k, b));
      return make_f(f->kind, kNoId, std::move(ks), f->vars);
    }
  }
}

void check_binding(const Signature& sig, const Binding& b) {
  for (const auto& [v, e] : b) {
    const Node& vn = node(v);
    if (vn.kind == Kind::LVar) {
      if (!is_lexpr(e) || sort_of(sig, e) != vn.sort)
        throw Error("SortMismatch", "cannot bind " + show(v) + " to " + show(e));
    } else if (vn.kind == Kind::DVar) {
      if (!is_domain_term(e)) throw Error("SortMismatch", "cannot bind " + show(v) + " to " + show(e));
    } else {
      throw Error("SortMismatch", show(v) + " is not a variable");
    }
  }
}

bool match_vars(Id pat, Id target, Binding& b) {
  if (pat == target) {
    const Node& p = node(pat);
    if (p.kind == Kind::LVar || p.kind == Kind::DVar) {
      auto it = b.find(pat);
      if (it == b.end()) {
        b[pat] = target;
        return true;
      }
      return it->second == target;
    }
  }
  const Node& p = node(pat);
  if (p.kind == Kind::LVar || p.kind == Kind::DVar) {
    const Node& t = node(target);
    if (p.kind == Kind::LVar && (!is_lexpr(target) || t.sort != p.sort)) return false;
    if (p.kind == Kind::DVar && !is_domain_term(target)) return false;
    auto it = b.find(pat);
    if (it == b.end()) {
      b[pat] = target;
      return true;
    }
    return it->second == target;
  }
  const Node& t = node(target);
  if (p.kind != t.kind || p.sym != t.sym || p.args.size() != t.args.size()) return false;
  for (std::size_t i = 0; i < p.args.size(); ++i)
    if (!match_vars(p.args[i], t.args[i], b)) return false;
  return true;
}

// ---------------------------------------------------------------- collectors

void collect_lvars(Id n, std::set<Id>& out) {
  const Node& nd = node(n);
  if (nd.kind == Kind::LVar) {
    out.insert(n);
    return;
  }
  for (Id a : nd.args) collect_lvars(a, out);
}

void collect_dvars(Id n, std::set<Id>& out) {
  const Node& nd = node(n);
  if (nd.kind == Kind::DVar) {
    out.insert(n);
    return;
  }
  for (Id a : nd.args) collect_dvars(a, out);
}

void collect_lexprs(Id n, std::set<Id>& out) {
  if (is_lexpr(n)) {
    out.insert(n);
    return;
  }
  for (Id a : node(n).args) collect_lexprs(a, out);
}

void collect_all_lexprs(Id n, std::set<Id>& out) {
  if (is_lexpr(n)) out.insert(n);
  for (Id a : node(n).args) collect_all_lexprs(a, out);
}

namespace {
template <typename Fn>
void walk_atoms(const F& f, Fn&& fn) {
  if (f->kind == FKind::Atom) {
    fn(f->atom);
    return;
  }
  for (const auto& k : f->kids) walk_atoms(k, fn);
}
}  // namespace

void collect_lvars(const F& f, std::set<Id>& out) {
  walk_atoms(f, [&](Id a) { collect_lvars(a, out); });
}

void collect_lexprs(const F& f, std::set<Id>& out) {
  walk_atoms(f, [&](Id a) { collect_lexprs(a, out); });
}

void collect_atoms(const F& f, std::vector<Id>& out) {
  walk_atoms(f, [&](Id a) { out.push_back(a); });
}

void collect_free_dvars(const F& f, std::set<Id>& out) {
  std::function<void(const F&, std::set<Id>&)> go = [&](const F& g, std::set<Id>& bound) {
    if (g->kind == FKind::Atom) {
      std::set<Id> vs;
      collect_dvars(g->atom, vs);
      for (Id v : vs)
        if (!bound.count(v)) out.insert(v);
      return;
    }
    if (g->kind == FKind::Forall || g->kind == FKind::Exists) {
      std::set<Id> inner = bound;
      for (Id v : g->vars) inner.insert(v);
      go(g->kids[0], inner);
      return;
    }
    for (const auto& k : g->kids) go(k, bound);
  };
  std::set<Id> bound;
  go(f, bound);
}

bool contains_connective(const F& f, const std::string& conn) {
  Sym s = intern(conn);
  bool found = false;
  std::function<void(Id)> look = [&](Id n) {
    const Node& nd = node(n);
    if (nd.kind == Kind::LApp && nd.sym == s) found = true;
    for (Id a : nd.args) look(a);
  };
  walk_atoms(f, look);
  return found;
}

bool has_lsort_quantifier(const F& f) {
  if (f->kind == FKind::Forall || f->kind == FKind::Exists)
    for (Id v : f->vars)
      if (node(v).kind == Kind::LVar) return true;
  for (const auto& k : f->kids)
    if (has_lsort_quantifier(k)) return true;
  return false;
}

bool is_l_open_sentence(const F& f) {
  if (has_lsort_quantifier(f)) return false;
  std::set<Id> free;
  collect_free_dvars(f, free);
  return free.empty();
}

std::vector<F> restrict_to(const std::vector<F>& sentences, const std::set<Id>& x) {
  std::vector<F> out;
  for (const auto& s : sentences) {
    std::set<Id> vs;
    collect_lvars(s, vs);
    std::vector<Id> vars(vs.begin(), vs.end());
    std::vector<std::vector<Id>> choices;
    for (Id v : vars) {
      std::vector<Id> c;
      for (Id e : x)
        if (node(e).sort == node(v).sort) c.push_back(e);
      choices.push_back(std::move(c));
    }
    std::vector<std::size_t> idx(vars.size(), 0);
    bool empty_choice = false;
    for (const auto& c : choices) empty_choice |= c.empty();
    if (empty_choice) continue;
    std::set<std::string> seen;
    while (true) {
      Binding b;
      for (std::size_t i = 0; i < vars.size(); ++i) b[vars[i]] = choices[i][idx[i]];
      F inst = substitute(s, b);
      std::set<Id> exprs;
      walk_atoms(inst, [&](Id a) { collect_all_lexprs(a, exprs); });
      bool ok = true;
      for (Id e : exprs)
        if (!x.count(e)) {
          ok = false;
          break;
        }
      if (ok && seen.insert(show(inst)).second) out.push_back(inst);
      std::size_t k = 0;
      while (k < idx.size()) {
        if (++idx[k] < choices[k].size()) break;
        idx[k] = 0;
        ++k;
      }
      if (k == idx.size()) break;
    }
  }
  return out;
}

// ---------------------------------------------------------------- printing

std::string show(Id n) {
  const Node& nd = node(n);
  std::string out;
  auto args = [&](const std::vector<Id>& as) {
    std::string s = "(";
    for (std::size_t i = 0; i < as.size(); ++i) {
      if (i) s += ", ";
      s += show(as[i]);
    }
    return s + ")";
  };
  switch (nd.kind) {
    case Kind::LVar:
    case Kind::LConst:
    case Kind::DVar:
    case Kind::DConst:
      return name_of(nd.sym);
    case Kind::PVar:
      return "?" + std::to_string(nd.sym);
    case Kind::LApp:
    case Kind::DFun:
    case Kind::Nu0:
      if (nd.args.empty()) return name_of(nd.sym);
      return name_of(nd.sym) + args(nd.args);
    case Kind::Atom:
      if (nd.args.empty()) return name_of(nd.sym);
      return name_of(nd.sym) + args(nd.args);
    case Kind::NegAtom:
      if (nd.args.empty()) return "not(" + name_of(nd.sym) + ")";
      return "not(" + name_of(nd.sym) + args(nd.args) + ")";
    case Kind::Inst:
      return "inst#" + std::to_string(nd.sym) + args(nd.args);
  }
  return out;
}

std::string show(const F& f) {
  auto list = [&](const std::string& h) {
    std::string s = h + "(";
    for (std::size_t i = 0; i < f->kids.size(); ++i) {
      if (i) s += ", ";
      s += show(f->kids[i]);
    }
    return s + ")";
  };
  switch (f->kind) {
    case FKind::Atom:
      return show(f->atom);
    case FKind::Not:
      return list("not");
    case FKind::And:
      return list("and");
    case FKind::Or:
      return list("or");
    case FKind::Implies:
      return list("impl");
    case FKind::Iff:
      return list("iff");
    case FKind::Bot:
      return "bot";
    case FKind::Top:
      return "top";
    case FKind::Forall:
    case FKind::Exists: {
      std::string s = f->kind == FKind::Forall ? "forall" : "exists";
      for (Id v : f->vars) s += " " + show(v);
      return s + ". " + show(f->kids[0]);
    }
  }
  return "";
}

// ---------------------------------------------------------------- lexer

Lexer::Lexer(std::string text, int line0) : text_(std::move(text)), line0_(line0) { scan(); }

void Lexer::scan() {
  int line = line0_, col = 1;
  std::size_t i = 0;
  auto is_id = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  };
  while (i < text_.size()) {
    char c = text_[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      ++col;
      continue;
    }
    if (c == '#') {
      while (i < text_.size() && text_[i] != '\n') ++i;
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (is_id(c)) {
      std::size_t j = i;
      while (j < text_.size() && is_id(text_[j])) ++j;
      t.type = Token::Ident;
      t.text = text_.substr(i, j - i);
      col += static_cast<int>(j - i);
      i = j;
    } else {
      t.type = Token::Punct;
      static const char* multi[] = {"<->", "->", "<-"};
      bool done = false;
      for (const char* m : multi) {
        std::size_t len = std::char_traits<char>::length(m);
        if (text_.compare(i, len, m) == 0) {
          t.text = m;
          i += len;
          col += static_cast<int>(len);
          done = true;
          break;
        }
      }
      if (!done) {
        t.text = std::string(1, c);
        ++i;
        ++col;
      }
    }
    toks_.push_back(std::move(t));
  }
  Token end;
  end.type = Token::End;
  end.line = line;
  end.col = col;
  toks_.push_back(end);
}

const Token& Lexer::peek(int k) {
  std::size_t p = std::min(pos_ + static_cast<std::size_t>(k), toks_.size() - 1);
  return toks_[p];
}

Token Lexer::next() {
  Token t = toks_[pos_];
  if (pos_ + 1 < toks_.size()) ++pos_;
  return t;
}

bool Lexer::accept(const std::string& punct) {
  if (peek().type == Token::Punct && peek().text == punct) {
    next();
    return true;
  }
  return false;
}

void Lexer::expect(const std::string& punct) {
  if (!accept(punct)) fail("expected '" + punct + "'");
}

bool Lexer::at_end() { return peek().type == Token::End; }

void Lexer::fail(const std::string& msg) {
  const Token& t = peek();
  std::ostringstream os;
  os << "line " << t.line << ", col " << t.col << ": " << msg;
  if (t.type != Token::End) os << " near '" << t.text << "'";
  throw Error("SyntaxError", os.str());
}

// ---------------------------------------------------------------- parser

namespace {
bool is_fo_keyword(const std::string& s) {
  return s == "not" || s == "and" || s == "or" || s == "impl" || s == "iff" || s == "bot" ||
         s == "top" || s == "forall" || s == "exists" || s == "true" || s == "false";
}
}  // namespace

F Parser::formula() {
  const Token& t = lx_.peek();
  if (t.type == Token::Ident && (t.text == "forall" || t.text == "exists") &&
      lx_.peek(1).type == Token::Ident) {
    bool univ = lx_.next().text == "forall";
    std::vector<Id> vars;
    std::set<std::string> names;
    while (lx_.peek().type == Token::Ident) {
      std::string v = lx_.next().text;
      const Signature* sig = ctx_.sig;
      bool lsort = sig && (sig->lvars.count(v) ||
                           (ctx_.local_sorts.count(v) && ctx_.local_sorts.at(v) >= 0));
      if (lsort) {
        int s = sig->lvars.count(v) ? sig->lvars.at(v) : ctx_.local_sorts.at(v);
        vars.push_back(lvar(v, s));
      } else {
        vars.push_back(dvar(v));
        names.insert(v);
      }
    }
    lx_.expect(".");
    bound_.push_back(names);
    F body = formula();
    bound_.pop_back();
    F q = univ ? f_forall(vars, body) : f_exists(vars, body);
    return q;
  }
  return iff_level();
}

F Parser::iff_level() {
  F a = imp_level();
  if (lx_.accept("<->")) {
    F b = imp_level();
    return f_iff(a, b);
  }
  return a;
}

F Parser::imp_level() {
  F a = primary();
  if (lx_.accept("->")) {
    F b = lx_.peek().type == Token::Ident &&
                  (lx_.peek().text == "forall" || lx_.peek().text == "exists")
              ? formula()
              : imp_level();
    return f_implies(a, b);
  }
  return a;
}

F Parser::primary() {
  const Token& t = lx_.peek();
  if (t.type == Token::Punct && t.text == "(") {
    lx_.next();
    F f = formula();
    lx_.expect(")");
    return f;
  }
  if (t.type != Token::Ident) lx_.fail("expected formula");
  std::string w = t.text;
  if ((w == "bot" || w == "false") && !(lx_.peek(1).type == Token::Punct && lx_.peek(1).text == "(")) {
    lx_.next();
    return f_bot();
  }
  if ((w == "top" || w == "true") && !(lx_.peek(1).type == Token::Punct && lx_.peek(1).text == "(")) {
    lx_.next();
    return f_top();
  }
  if (w == "forall" || w == "exists") return formula();
  if (is_fo_keyword(w) && lx_.peek(1).type == Token::Punct && lx_.peek(1).text == "(") {
    lx_.next();
    lx_.expect("(");
    std::vector<F> ks;
    ks.push_back(formula());
    while (lx_.accept(",")) ks.push_back(formula());
    lx_.expect(")");
    if (w == "not") {
      if (ks.size() != 1) lx_.fail("not takes one argument");
      return f_not(ks[0]);
    }
    if (w == "and") return ks.size() == 1 ? ks[0] : f_and(ks);
    if (w == "or") return ks.size() == 1 ? ks[0] : f_or(ks);
    if (ks.size() != 2) lx_.fail(w + " takes two arguments");
    if (w == "impl") return f_implies(ks[0], ks[1]);
    return f_iff(ks[0], ks[1]);
  }
  return f_atom(atom());
}

Id Parser::atom() {
  Token t = lx_.next();
  if (t.type != Token::Ident) lx_.fail("expected atom");
  const std::string& p = t.text;
  if (p == "bot") return bot_lit();
  int n = nu_index(intern(p));
  if (n >= 0 && p != "nu0") {
    lx_.expect("(");
    std::vector<Id> args;
    args.push_back(lexpr(n));
    for (int i = 0; i < n; ++i) {
      lx_.expect(",");
      args.push_back(term());
    }
    lx_.expect(")");
    return mk_atom(sym_nu(n), std::move(args));
  }
  if (p == "eq") {
    lx_.expect("(");
    int s = kNoSort;
    Id a = any_arg(s);
    lx_.expect(",");
    Id b = s == kDomainSort ? term() : lexpr(s);
    lx_.expect(")");
    return mk_atom(sym_eq(), {a, b});
  }
  if (p == "holds") {
    lx_.expect("(");
    Id c = lexpr(1);
    lx_.expect(")");
    return mk_atom(sym_holds(), {c});
  }
  const Predicate* pr = ctx_.sig ? ctx_.sig->predicate(p) : nullptr;
  if (!pr) throw Error("UndefinedPredicate", "line " + std::to_string(t.line) + ": " + p);
  std::vector<Id> args;
  lx_.expect("(");
  for (int i = 0; i < pr->arity; ++i) {
    if (i) lx_.expect(",");
    args.push_back(term());
  }
  lx_.expect(")");
  return mk_atom(intern(p), std::move(args));
}

Id Parser::any_arg(int& sort_out) {
  const Token& t = lx_.peek();
  if (t.type != Token::Ident) lx_.fail("expected term");
  const std::string& w = t.text;
  const Signature* sig = ctx_.sig;
  bool bound = false;
  for (const auto& s : bound_) bound |= s.count(w) > 0;
  bool domain = w == "nu0" || bound || (sig && (sig->function(w) || sig->is_domain_var(w))) ||
                (ctx_.local_sorts.count(w) && ctx_.local_sorts.at(w) == kDomainSort);
  bool lsort = sig && (sig->connective(w) || sig->lvars.count(w) || sig->lconsts.count(w));
  lsort |= ctx_.local_sorts.count(w) && ctx_.local_sorts.at(w) >= 0;
  if (domain || !lsort) {
    sort_out = kDomainSort;
    return term();
  }
  Id e = lexpr(kNoSort);
  sort_out = node(e).sort;
  return e;
}

Id Parser::lexpr(int expected) {
  Token t = lx_.next();
  if (t.type != Token::Ident) lx_.fail("expected expression");
  const std::string& w = t.text;
  const Signature* sig = ctx_.sig;
  auto check = [&](Id e) {
    if (expected != kNoSort && node(e).sort != expected)
      throw Error("IllSorted", "line " + std::to_string(t.line) + ", col " +
                                   std::to_string(t.col) + ": '" + w + "' has sort " +
                                   std::to_string(node(e).sort) + ", expected " +
                                   std::to_string(expected));
    return e;
  };
  for (const auto& s : bound_)
    if (s.count(w))
      throw Error("IllSorted", "line " + std::to_string(t.line) + ": domain variable '" + w +
                                   "' used as an expression");
  if (sig) {
    if (const Connective* c = sig->connective(w)) {
      std::vector<Id> args;
      if (!c->arg_sorts.empty()) {
        lx_.expect("(");
        for (std::size_t i = 0; i < c->arg_sorts.size(); ++i) {
          if (i) lx_.expect(",");
          args.push_back(lexpr(c->arg_sorts[i]));
        }
        lx_.expect(")");
      } else if (lx_.accept("(")) {
        lx_.expect(")");
      }
      return check(mk(Kind::LApp, intern(w), c->result_sort, std::move(args)));
    }
  }
  if (lx_.peek().type == Token::Punct && lx_.peek().text == "(")
    throw Error("UndefinedConnective", "line " + std::to_string(t.line) + ": " + w);
  if (sig && sig->lvars.count(w))
    return check(ctx_.mode == ParseMode::Ground ? lconst(w, sig->lvars.at(w)) : lvar(w, sig->lvars.at(w)));
  if (sig && sig->lconsts.count(w)) return check(lconst(w, sig->lconsts.at(w)));
  if (ctx_.local_sorts.count(w) && ctx_.local_sorts.at(w) >= 0)
    return check(lvar(w, ctx_.local_sorts.at(w)));
  if (expected == kNoSort)
    throw Error("IllSorted", "line " + std::to_string(t.line) + ": cannot infer sort of '" + w + "'");
  switch (ctx_.mode) {
    case ParseMode::Schematic:
      return lvar(w, expected);
    case ParseMode::Ground:
      return lconst(w, expected);
    case ParseMode::Strict:
      break;
  }
  throw Error("UndefinedSymbol", "line " + std::to_string(t.line) + ": " + w);
}

Id Parser::term() {
  Token t = lx_.next();
  if (t.type != Token::Ident) lx_.fail("expected term");
  const std::string& w = t.text;
  const Signature* sig = ctx_.sig;
  if (w == "nu0") {
    lx_.expect("(");
    Id e = lexpr(0);
    lx_.expect(")");
    return nu0(e);
  }
  if (lx_.peek().type == Token::Punct && lx_.peek().text == "(") {
    const FunctionSym* f = sig ? sig->function(w) : nullptr;
    if (!f) throw Error("UndefinedFunction", "line " + std::to_string(t.line) + ": " + w);
    lx_.expect("(");
    std::vector<Id> args;
    for (std::size_t i = 0; i < f->arg_sorts.size(); ++i) {
      if (i) lx_.expect(",");
      args.push_back(f->arg_sorts[i] == kDomainSort ? term() : lexpr(f->arg_sorts[i]));
    }
    lx_.expect(")");
    return dfun(w, std::move(args));
  }
  bool bound = false;
  for (const auto& s : bound_) bound |= s.count(w) > 0;
  if (bound || (sig && sig->is_domain_var(w)) ||
      (ctx_.local_sorts.count(w) && ctx_.local_sorts.at(w) == kDomainSort))
    return dvar(w);
  if (sig && (sig->lvars.count(w) || sig->lconsts.count(w)))
    throw Error("IllSorted", "line " + std::to_string(t.line) + ": '" + w +
                                 "' is an object-language symbol in a domain position");
  switch (ctx_.mode) {
    case ParseMode::Schematic:
      return dvar(w);
    case ParseMode::Ground:
      return dconst(w);
    case ParseMode::Strict:
      break;
  }
  throw Error("UndefinedSymbol", "line " + std::to_string(t.line) + ": " + w);
}

Id Parser::atom_or_literal(bool allow_neg) {
  const Token& t = lx_.peek();
  if (allow_neg && t.type == Token::Ident && t.text == "not" && lx_.peek(1).type == Token::Punct &&
      lx_.peek(1).text == "(") {
    lx_.next();
    lx_.expect("(");
    Id a = atom();
    lx_.expect(")");
    return negate(a);
  }
  if (t.type == Token::Ident && t.text == "top") {
    lx_.next();
    return top_lit();
  }
  return atom();
}

Id Parser::literal() { return atom_or_literal(true); }

F parse_formula(const std::string& text, const ParseContext& ctx) {
  Lexer lx(text);
  Parser p(lx, ctx);
  F f = p.formula();
  if (!lx.at_end()) lx.fail("trailing input");
  return f;
}

Id parse_lexpr(const std::string& text, const ParseContext& ctx, int expected_sort) {
  Lexer lx(text);
  Parser p(lx, ctx);
  Id e = p.lexpr(expected_sort);
  if (!lx.at_end()) lx.fail("trailing input");
  return e;
}

Id parse_literal(const std::string& text, const ParseContext& ctx) {
  Lexer lx(text);
  Parser p(lx, ctx);
  Id e = p.literal();
  if (!lx.at_end()) lx.fail("trailing input");
  return e;
}

Id parse_term(const std::string& text, const ParseContext& ctx) {
  Lexer lx(text);
  Parser p(lx, ctx);
  Id e = p.term();
  if (!lx.at_end()) lx.fail("trailing input");
  return e;
}

}  // namespace tabsyn
