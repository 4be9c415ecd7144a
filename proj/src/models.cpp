#include "tabsyn/models.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <climits>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tabsyn {

// ---------------------------------------------------------------- evaluator

Evaluator::Evaluator(const NormalizedSpec& ns) : ns_(&ns) {}

int Evaluator::compile(const F& f) {
  std::set<Id> fv;
  collect_free_dvars(f, fv);
  Scope sc;
  Compiled c;
  for (Id v : fv) {
    sc.slot[v] = sc.next++;
    c.free.push_back(v);
  }
  c.root = compile_node(f, sc);
  c.slots = sc.next;
  formulas_.push_back(std::move(c));
  return static_cast<int>(formulas_.size()) - 1;
}

int Evaluator::compile_node(const F& f, Scope& sc) {
  ENode n;
  switch (f->kind) {
    case FKind::Bot:
      n.op = Op::Bot;
      break;
    case FKind::Top:
      n.op = Op::Top;
      break;
    case FKind::Atom:
      return compile_atom(f->atom, sc);
    case FKind::Not:
    case FKind::And:
    case FKind::Or:
    case FKind::Implies:
    case FKind::Iff: {
      static const Op ops[] = {Op::Not, Op::And, Op::Or, Op::Imp, Op::Iff};
      n.op = ops[static_cast<int>(f->kind) - static_cast<int>(FKind::Not)];
      for (const auto& k : f->kids) n.kids.push_back(compile_node(k, sc));
      break;
    }
    case FKind::Forall:
    case FKind::Exists: {
      Op op = f->kind == FKind::Forall ? Op::All : Op::Ex;
      std::vector<std::pair<Id, std::optional<int>>> saved;
      std::vector<int> slots;
      for (Id v : f->vars) {
        auto it = sc.slot.find(v);
        saved.emplace_back(v, it == sc.slot.end() ? std::nullopt : std::optional<int>(it->second));
        sc.slot[v] = sc.next;
        slots.push_back(sc.next++);
      }
      int body = compile_node(f->kids[0], sc);
      for (auto& [v, old] : saved) {
        if (old)
          sc.slot[v] = *old;
        else
          sc.slot.erase(v);
      }
      for (auto it = slots.rbegin(); it != slots.rend(); ++it) {
        ENode q;
        q.op = op;
        q.index = *it;
        q.kids = {body};
        nodes_.push_back(std::move(q));
        body = static_cast<int>(nodes_.size()) - 1;
      }
      return body;
    }
  }
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int Evaluator::compile_atom(Id atom, Scope& sc) {
  const Node& a = node(atom);
  ENode n;
  if (a.sym == sym_bot()) {
    n.op = Op::Bot;
  } else if (a.sym == sym_eq() && is_lexpr(a.args[0]) && is_lexpr(a.args[1])) {
    std::set<Id> lv;
    collect_lvars(atom, lv);
    if (!lv.empty()) throw Error("UnassignedVariable", "object variable in " + show(atom));
    n.op = a.args[0] == a.args[1] ? Op::Top : Op::Bot;
  } else if (a.sym == sym_eq()) {
    n.op = Op::Eq;
    for (Id t : a.args) n.terms.push_back(compile_term(t, sc));
  } else if (int k = nu_index(a.sym); k >= 1) {
    Id e = a.args[0];
    const Node& en = node(e);
    std::set<Id> lv;
    collect_lvars(e, lv);
    if (!lv.empty()) throw Error("UnassignedVariable", "object variable in " + show(atom));
    if (en.kind == Kind::LConst) {
      n.op = Op::Atom;
      n.index = atom_index(e);
    } else if (en.kind == Kind::LApp) {
      n.op = Op::Compound;
      n.index = compound_index(e);
    } else {
      throw Error("IllSorted", "cannot evaluate " + show(atom));
    }
    for (std::size_t i = 1; i < a.args.size(); ++i) n.terms.push_back(compile_term(a.args[i], sc));
  } else {
    n.op = Op::Pred;
    n.index = pred_index(a.sym, static_cast<int>(a.args.size()));
    for (Id t : a.args) n.terms.push_back(compile_term(t, sc));
  }
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

Evaluator::TermRef Evaluator::compile_term(Id t, Scope& sc) {
  const Node& n = node(t);
  switch (n.kind) {
    case Kind::DVar: {
      auto it = sc.slot.find(t);
      if (it == sc.slot.end()) throw Error("UnassignedVariable", show(t));
      return {TermRef::Var, it->second};
    }
    case Kind::Nu0: {
      Id e = n.args[0];
      std::set<Id> lv;
      collect_lvars(e, lv);
      if (!lv.empty()) throw Error("UnassignedVariable", "object variable in " + show(t));
      auto [it, fresh] = nu0_ids_.try_emplace(e, static_cast<int>(nu0_exprs_.size()));
      if (fresh) {
        nu0_exprs_.push_back(e);
        nu0_val_.push_back(-1);
      }
      return {TermRef::Individual, it->second};
    }
    case Kind::DConst:
    case Kind::DFun: {
      auto [it, fresh] = ground_ids_.try_emplace(t, static_cast<int>(ground_terms_.size()));
      if (fresh) {
        ground_terms_.push_back(t);
        ground_val_.push_back(-1);
      }
      return {TermRef::Ground, it->second};
    }
    default:
      throw Error("IllSorted", show(t) + " is not a domain term");
  }
}

static std::size_t power(int base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

int Evaluator::atom_index(Id expr) {
  auto [it, fresh] = atom_ids_.try_emplace(expr, static_cast<int>(atom_exprs_.size()));
  if (fresh) {
    atom_exprs_.push_back(expr);
    atom_arity_.push_back(node(expr).sort);
    atom_tab_.emplace_back(power(size_, node(expr).sort), 0);
  }
  return it->second;
}

int Evaluator::pred_index(Sym p, int arity) {
  auto [it, fresh] = pred_ids_.try_emplace(p, static_cast<int>(pred_syms_.size()));
  if (fresh) {
    pred_syms_.push_back(p);
    pred_arity_.push_back(arity);
    pred_tab_.emplace_back(power(size_, arity), 0);
  }
  return it->second;
}

int Evaluator::compound_index(Id expr) {
  if (auto it = compound_ids_.find(expr); it != compound_ids_.end()) return it->second;
  int idx = static_cast<int>(compounds_.size());
  compounds_.emplace_back();
  compound_exprs_.push_back(expr);
  compound_ids_[expr] = idx;
  auto def = ns_->definition_of(node(expr).sym);
  if (!def) throw Error("NoDefinition", "no definition for " + show(expr));
  const Node& head = node(def->first);
  Binding b;
  if (!match_vars(head.args[0], expr, b)) throw Error("NoDefinition", "definition does not cover " + show(expr));
  F body = substitute(def->second, b);
  Scope sc;
  for (std::size_t i = 1; i < head.args.size(); ++i) sc.slot[head.args[i]] = sc.next++;
  int arity = sc.next;
  int root = compile_node(body, sc);
  Compound& c = compounds_[idx];
  c.body = root;
  c.arity = arity;
  c.slots = sc.next;
  c.memo.assign(power(size_, arity), -1);
  return idx;
}

void Evaluator::resize(int size) {
  size_ = size;
  for (std::size_t i = 0; i < atom_tab_.size(); ++i) atom_tab_[i].assign(power(size, atom_arity_[i]), 0);
  for (std::size_t i = 0; i < pred_tab_.size(); ++i) pred_tab_[i].assign(power(size, pred_arity_[i]), 0);
  for (auto& c : compounds_) c.memo.assign(power(size, c.arity), -1);
  std::fill(nu0_val_.begin(), nu0_val_.end(), -1);
  std::fill(ground_val_.begin(), ground_val_.end(), -1);
}

void Evaluator::clear_memo() {
  for (auto& c : compounds_) std::fill(c.memo.begin(), c.memo.end(), -1);
}

static std::size_t encode(const std::vector<int>& tuple, int size) {
  std::size_t k = 0, w = 1;
  for (int e : tuple) {
    k += static_cast<std::size_t>(e) * w;
    w *= static_cast<std::size_t>(size);
  }
  return k;
}

void Evaluator::bind(const LStructure& m) {
  if (m.size < 1) throw Error("EmptyDomain", "structure has no elements");
  resize(m.size);
  auto check = [&](int e) {
    if (e < 0 || e >= m.size) throw Error("BadElement", "element index out of range");
    return e;
  };
  for (std::size_t i = 0; i < atom_exprs_.size(); ++i) {
    auto it = m.nu.find(atom_exprs_[i]);
    if (it == m.nu.end()) continue;
    for (const auto& t : it->second) {
      if (static_cast<int>(t.size()) != atom_arity_[i]) throw Error("BadArity", show(atom_exprs_[i]));
      for (int e : t) check(e);
      atom_tab_[i][encode(t, m.size)] = 1;
    }
  }
  for (std::size_t i = 0; i < pred_syms_.size(); ++i) {
    auto it = m.pred.find(pred_syms_[i]);
    if (it == m.pred.end()) continue;
    for (const auto& t : it->second) {
      if (static_cast<int>(t.size()) != pred_arity_[i]) throw Error("BadArity", name_of(pred_syms_[i]));
      for (int e : t) check(e);
      pred_tab_[i][encode(t, m.size)] = 1;
    }
  }
  for (std::size_t i = 0; i < nu0_exprs_.size(); ++i)
    if (auto it = m.nu0.find(nu0_exprs_[i]); it != m.nu0.end()) nu0_val_[i] = check(it->second);
  for (std::size_t i = 0; i < ground_terms_.size(); ++i)
    if (auto it = m.terms.find(ground_terms_[i]); it != m.terms.end()) ground_val_[i] = check(it->second);
}

int Evaluator::element(const TermRef& t, const std::vector<int>& env) const {
  int e = -1;
  switch (t.type) {
    case TermRef::Var:
      e = env[t.index];
      break;
    case TermRef::Individual:
      e = nu0_val_[t.index];
      if (e < 0) throw Error("UnassignedVariable", "no element for " + show(nu0_exprs_[t.index]));
      return e;
    case TermRef::Ground:
      e = ground_val_[t.index];
      if (e < 0) throw Error("UnassignedVariable", "no element for " + show(ground_terms_[t.index]));
      return e;
  }
  if (e < 0) throw Error("UnassignedVariable", "unbound domain variable");
  return e;
}

std::size_t Evaluator::tuple_index(const std::vector<TermRef>& ts, std::size_t from,
                                   const std::vector<int>& env) const {
  std::size_t k = 0, w = 1;
  for (std::size_t i = from; i < ts.size(); ++i) {
    k += static_cast<std::size_t>(element(ts[i], env)) * w;
    w *= static_cast<std::size_t>(size_);
  }
  return k;
}

bool Evaluator::eval(int id, std::vector<int>& env) {
  const ENode& n = nodes_[id];
  switch (n.op) {
    case Op::Bot:
      return false;
    case Op::Top:
      return true;
    case Op::Eq:
      return element(n.terms[0], env) == element(n.terms[1], env);
    case Op::Atom:
      return atom_tab_[n.index][tuple_index(n.terms, 0, env)] != 0;
    case Op::Pred:
      return pred_tab_[n.index][tuple_index(n.terms, 0, env)] != 0;
    case Op::Compound: {
      Compound& c = compounds_[n.index];
      if (c.body < 0) throw Error("NoDefinition", show(compound_exprs_[n.index]));
      std::size_t k = tuple_index(n.terms, 0, env);
      std::int8_t& slot = c.memo[k];
      if (slot >= 0) return slot != 0;
      if (slot == -2) throw Error("NotWellFounded", "cyclic unfolding of " + show(compound_exprs_[n.index]));
      slot = -2;
      std::vector<int> inner(static_cast<std::size_t>(c.slots), -1);
      for (std::size_t i = 0; i < n.terms.size(); ++i) inner[i] = element(n.terms[i], env);
      bool r = eval(c.body, inner);
      compounds_[n.index].memo[k] = r ? 1 : 0;
      return r;
    }
    case Op::Not:
      return !eval(n.kids[0], env);
    case Op::And:
      for (int k : n.kids)
        if (!eval(k, env)) return false;
      return true;
    case Op::Or:
      for (int k : n.kids)
        if (eval(k, env)) return true;
      return false;
    case Op::Imp:
      return !eval(n.kids[0], env) || eval(n.kids[1], env);
    case Op::Iff:
      return eval(n.kids[0], env) == eval(n.kids[1], env);
    case Op::All:
    case Op::Ex: {
      bool want = n.op == Op::Ex;
      int saved = env[n.index];
      bool r = !want;
      for (int e = 0; e < size_; ++e) {
        env[n.index] = e;
        if (eval(n.kids[0], env) == want) {
          r = want;
          break;
        }
      }
      env[n.index] = saved;
      return r;
    }
  }
  return false;
}

bool Evaluator::holds(int handle, const std::vector<int>& free_values) {
  const Compiled& c = formulas_[handle];
  if (free_values.size() != c.free.size()) throw Error("UnassignedVariable", "wrong number of free values");
  if (size_ < 1) throw Error("EmptyDomain", "no structure bound");
  std::vector<int> env(static_cast<std::size_t>(c.slots), -1);
  for (std::size_t i = 0; i < free_values.size(); ++i) {
    if (free_values[i] < 0 || free_values[i] >= size_) throw Error("BadElement", "element index out of range");
    env[i] = free_values[i];
  }
  return eval(c.root, env);
}

void Evaluator::deps(int id, std::set<int>& a, std::set<int>& p, std::set<int>& ind,
                     std::set<int>& seen) const {
  const ENode& n = nodes_[id];
  for (const auto& t : n.terms)
    if (t.type == TermRef::Individual) ind.insert(t.index);
  if (n.op == Op::Atom) a.insert(n.index);
  if (n.op == Op::Pred) p.insert(n.index);
  if (n.op == Op::Compound && seen.insert(n.index).second && compounds_[n.index].body >= 0)
    deps(compounds_[n.index].body, a, p, ind, seen);
  for (int k : n.kids) deps(k, a, p, ind, seen);
}

void Evaluator::dependencies(int handle, std::set<int>& atoms, std::set<int>& preds,
                             std::set<int>& individuals) const {
  std::set<int> seen;
  deps(formulas_[handle].root, atoms, preds, individuals, seen);
}

static std::vector<int> decode_tuple(std::size_t k, int arity, int size) {
  std::vector<int> t(static_cast<std::size_t>(arity));
  for (int i = 0; i < arity; ++i) {
    t[i] = static_cast<int>(k % static_cast<std::size_t>(size));
    k /= static_cast<std::size_t>(size);
  }
  return t;
}

LStructure Evaluator::snapshot() const {
  LStructure m;
  m.size = size_;
  for (int e = 0; e < size_; ++e) m.names.push_back("e" + std::to_string(e));
  for (std::size_t i = 0; i < atom_exprs_.size(); ++i) {
    auto& s = m.nu[atom_exprs_[i]];
    for (std::size_t k = 0; k < atom_tab_[i].size(); ++k)
      if (atom_tab_[i][k]) s.insert(decode_tuple(k, atom_arity_[i], size_));
  }
  for (std::size_t i = 0; i < pred_syms_.size(); ++i) {
    auto& s = m.pred[pred_syms_[i]];
    for (std::size_t k = 0; k < pred_tab_[i].size(); ++k)
      if (pred_tab_[i][k]) s.insert(decode_tuple(k, pred_arity_[i], size_));
  }
  for (std::size_t i = 0; i < nu0_exprs_.size(); ++i)
    if (nu0_val_[i] >= 0) m.nu0[nu0_exprs_[i]] = nu0_val_[i];
  for (std::size_t i = 0; i < ground_terms_.size(); ++i)
    if (ground_val_[i] >= 0) m.terms[ground_terms_[i]] = ground_val_[i];
  return m;
}

bool evaluate(const NormalizedSpec& ns, const LStructure& m, const F& f, const Valuation& v) {
  Evaluator ev(ns);
  int h = ev.compile(f);
  ev.bind(m);
  std::vector<int> vals;
  for (Id x : ev.free_vars(h)) {
    auto it = v.find(x);
    if (it == v.end()) throw Error("UnassignedVariable", show(x));
    vals.push_back(it->second);
  }
  return ev.holds(h, vals);
}

// ---------------------------------------------------------------- extraction

std::vector<Id> decode_literal(const Calculus& c, Id lit) {
  if (is_bot(lit) || is_top(lit)) return {};
  if (!c.internalized) return {lit};
  const Node& a = node(atom_of(lit));
  if (a.sym != sym_holds() || a.args.size() != 1) return {};
  Id x = a.args[0];
  std::vector<Id> out;
  for (const auto& d : c.decode) {
    Binding b;
    if (!match_vars(d.expr, x, b)) continue;
    bool pol = positive(lit) ? d.positive : !d.positive;
    std::vector<Id> args;
    std::size_t first_label = 0;
    Sym pred;
    if (d.pred == "eq") {
      pred = sym_eq();
    } else if (d.pred.rfind("nu", 0) == 0 && d.pred.size() > 2) {
      pred = sym_nu(std::stoi(d.pred.substr(2)));
      args.push_back(b.at(d.params[0]));
      first_label = 1;
    } else {
      pred = intern(d.pred);
    }
    for (std::size_t i = first_label; i < d.params.size(); ++i) args.push_back(nu0(b.at(d.params[i])));
    Id fo = mk_lit(pol, pred, std::move(args));
    if (std::find(out.begin(), out.end(), fo) == out.end()) out.push_back(fo);
  }
  return out;
}

Id root_term(const Calculus& c, Id root_constant) {
  return c.internalized ? nu0(root_constant) : root_constant;
}

namespace {

void collect_domain_terms(Id n, std::vector<Id>& out, std::set<Id>& seen) {
  const Node& nd = node(n);
  if ((nd.kind == Kind::DConst || nd.kind == Kind::DFun || nd.kind == Kind::Nu0) && seen.insert(n).second)
    out.push_back(n);
  for (Id a : nd.args) collect_domain_terms(a, out, seen);
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::vector<F> background_sentences(const NormalizedSpec& ns) {
  std::vector<F> out;
  for (const auto& s : ns.sb) out.push_back(s.formula);
  return out;
}

std::vector<Id> decoded(const Calculus& c, const std::vector<Id>& lits) {
  std::vector<Id> out;
  std::set<Id> seen;
  for (Id l : lits)
    for (Id fo : decode_literal(c, l))
      if (seen.insert(fo).second) out.push_back(fo);
  return out;
}

}  // namespace

LStructure extract_model(const Branch& b, const Calculus& c, const NormalizedSpec& ns) {
  (void)ns;
  if (b.closed()) throw Error("BranchClosed", "branch#" + std::to_string(b.id) + " is closed");
  if (!b.saturated()) throw Error("NotSaturated", "branch#" + std::to_string(b.id) + " is not saturated");
  std::vector<Id> fo = decoded(c, b.literals());

  std::vector<Id> terms;
  std::set<Id> seen;
  for (Id t : b.terms()) {
    Id d = c.internalized ? nu0(t) : t;
    if (seen.insert(d).second) terms.push_back(d);
  }
  for (Id l : fo) collect_domain_terms(atom_of(l), terms, seen);
  std::map<Id, int> index;
  for (std::size_t i = 0; i < terms.size(); ++i) index[terms[i]] = static_cast<int>(i);

  UnionFind uf(terms.size());
  for (Id l : fo) {
    const Node& a = node(l);
    if (a.kind == Kind::Atom && a.sym == sym_eq() && is_domain_term(a.args[0])) uf.unite(index.at(a.args[0]), index.at(a.args[1]));
  }

  LStructure m;
  std::map<int, int> cls;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    int r = uf.find(static_cast<int>(i));
    if (!cls.count(r)) {
      cls[r] = m.size++;
      m.names.push_back(show(terms[r]));
    }
  }
  auto elem = [&](Id t) { return cls.at(uf.find(index.at(t))); };
  for (Id t : terms) {
    if (node(t).kind == Kind::Nu0)
      m.nu0[node(t).args[0]] = elem(t);
    else
      m.terms[t] = elem(t);
  }
  if (m.size == 0) throw Error("EmptyDomain", "branch mentions no domain terms");

  for (Id l : fo) {
    std::set<Id> ex;
    collect_all_lexprs(atom_of(l), ex);
    for (Id e : ex)
      if (node(e).sort == 0 && node(e).kind != Kind::LVar && !m.nu0.count(e)) m.nu0[e] = 0;
    const Node& a = node(l);
    if (a.kind != Kind::Atom || a.sym == sym_eq() || a.sym == sym_bot() || a.sym == sym_holds()) continue;
    int k = nu_index(a.sym);
    std::vector<int> tuple;
    for (std::size_t i = k >= 1 ? 1 : 0; i < a.args.size(); ++i) tuple.push_back(elem(a.args[i]));
    if (k >= 1) {
      if (node(a.args[0]).kind == Kind::LConst) m.nu[a.args[0]].insert(tuple);
    } else {
      m.pred[a.sym].insert(tuple);
    }
  }
  return m;
}

ReflectionReport verify_reflection(const NormalizedSpec& ns, const Calculus& c, const LStructure& m,
                                   const std::vector<Id>& literals) {
  ReflectionReport rep;
  Evaluator ev(ns);
  std::vector<std::pair<Id, int>> handles;
  for (Id l : literals)
    for (Id fo : decode_literal(c, l)) {
      try {
        handles.emplace_back(fo, ev.compile(f_lit(fo)));
      } catch (const Error& e) {
        rep.violations.push_back(show(fo) + ": " + e.what());
      }
    }
  ev.bind(m);
  for (auto [fo, h] : handles) {
    ++rep.checked;
    try {
      if (!ev.holds(h, {})) rep.violations.push_back(show(fo) + ": false in the model");
    } catch (const Error& e) {
      rep.violations.push_back(show(fo) + ": " + e.what());
    }
  }
  return rep;
}

ModelCheck check_model(const NormalizedSpec& ns, const Calculus& c, const LStructure& m,
                       const Branch& b, const Problem& p, Id root_constant) {
  ModelCheck mc;
  mc.reflection = verify_reflection(ns, c, m, b.literals());
  Evaluator ev(ns);
  Id root = root_term(c, root_constant);
  std::vector<int> inputs;
  for (const auto& r : p.roots)
    inputs.push_back(ev.compile(f_lit(mk_lit(r.positive, sym_nu(1), {r.expr, root}))));
  std::set<Id> x;
  for (Id fo : decoded(c, b.literals())) collect_all_lexprs(atom_of(fo), x);
  for (const auto& r : p.roots) collect_all_lexprs(r.expr, x);
  std::vector<std::pair<std::string, int>> bg;
  for (const F& s : restrict_to(background_sentences(ns), x)) bg.emplace_back(show(s), ev.compile(s));
  ev.bind(m);
  mc.inputs_hold = true;
  for (int h : inputs) {
    try {
      mc.inputs_hold = mc.inputs_hold && ev.holds(h, {});
    } catch (const Error&) {
      mc.inputs_hold = false;
    }
  }
  for (const auto& [text, h] : bg) {
    ++mc.background_checked;
    try {
      if (!ev.holds(h, {})) mc.background_violations.push_back(text);
    } catch (const Error& e) {
      mc.background_violations.push_back(text + ": " + e.what());
    }
  }
  return mc;
}

// ---------------------------------------------------------------- text format

namespace {

std::string elem_name(int e) { return "e" + std::to_string(e); }

std::string tuple_text(const std::vector<int>& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + elem_name(t[i]);
  return s + ")";
}

}  // namespace

std::string print_model(const LStructure& m) {
  std::ostringstream os;
  os << "domain:";
  for (int e = 0; e < m.size; ++e) os << " " << elem_name(e);
  os << "\n";
  for (int e = 0; e < m.size && e < static_cast<int>(m.names.size()); ++e)
    if (m.names[e] != elem_name(e)) os << "# " << elem_name(e) << " = " << m.names[e] << "\n";
  for (const auto& [e, v] : m.nu0) os << "nu0 " << show(e) << ": " << elem_name(v) << "\n";
  for (const auto& [t, v] : m.terms) os << "term " << show(t) << ": " << elem_name(v) << "\n";
  for (const auto& [e, ts] : m.nu) {
    int n = node(e).sort;
    os << "nu" << n << " " << show(e) << ":";
    for (const auto& t : ts) os << " " << (n == 1 ? elem_name(t[0]) : tuple_text(t));
    os << "\n";
  }
  for (const auto& [p, ts] : m.pred) {
    os << name_of(p) << ":";
    for (const auto& t : ts) os << " " << tuple_text(t);
    os << "\n";
  }
  return os.str();
}

LStructure parse_model(const std::string& text, const Signature& sig) {
  LStructure m;
  std::map<std::string, int> elems;
  ParseContext ctx;
  ctx.sig = &sig;
  ctx.mode = ParseMode::Ground;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  auto fail = [&](const std::string& msg) {
    return Error("SyntaxError", "model line " + std::to_string(line) + ": " + msg);
  };
  auto element = [&](const std::string& w) {
    auto it = elems.find(w);
    if (it == elems.end()) throw fail("unknown element '" + w + "'");
    return it->second;
  };
  auto words = [](const std::string& s) {
    std::istringstream ws(s);
    std::vector<std::string> out;
    std::string w;
    while (ws >> w) out.push_back(w);
    return out;
  };
  auto tuples = [&](const std::string& s) {
    std::vector<std::vector<int>> out;
    std::string t;
    for (char ch : s)
      if (!std::isspace(static_cast<unsigned char>(ch))) t += ch;
    std::size_t i = 0;
    while (i < t.size()) {
      if (t[i] != '(') throw fail("expected '('");
      std::size_t j = t.find(')', i);
      if (j == std::string::npos) throw fail("expected ')'");
      std::vector<int> tup;
      std::string inner = t.substr(i + 1, j - i - 1);
      std::size_t a = 0;
      while (a <= inner.size()) {
        std::size_t b = inner.find(',', a);
        if (b == std::string::npos) b = inner.size();
        tup.push_back(element(inner.substr(a, b - a)));
        a = b + 1;
      }
      out.push_back(tup);
      i = j + 1;
    }
    return out;
  };
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw.substr(0, raw.find('#'));
    if (s.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::size_t colon = s.find(':');
    if (colon == std::string::npos) throw fail("expected ':'");
    auto head = words(s.substr(0, colon));
    std::string rest = s.substr(colon + 1);
    if (head.empty()) throw fail("missing keyword");
    const std::string& kw = head[0];
    std::string arg;
    {
      std::size_t p = s.find(kw) + kw.size();
      arg = s.substr(p, colon - p);
    }
    try {
      if (kw == "domain") {
        for (const auto& w : words(rest)) {
          if (elems.count(w)) throw fail("duplicate element '" + w + "'");
          elems[w] = m.size++;
          m.names.push_back(w);
        }
      } else if (kw == "nu0") {
        m.nu0[parse_lexpr(arg, ctx, 0)] = element(words(rest).at(0));
      } else if (kw == "term") {
        m.terms[parse_term(arg, ctx)] = element(words(rest).at(0));
      } else if (kw.size() > 2 && kw.rfind("nu", 0) == 0 &&
                 std::all_of(kw.begin() + 2, kw.end(), [](char ch) { return std::isdigit(ch); })) {
        int n = std::stoi(kw.substr(2));
        Id e = parse_lexpr(arg, ctx, n);
        auto& set = m.nu[e];
        if (n == 1) {
          for (const auto& w : words(rest)) set.insert({element(w)});
        } else {
          for (auto& t : tuples(rest)) {
            if (static_cast<int>(t.size()) != n) throw fail("tuple arity mismatch");
            set.insert(t);
          }
        }
      } else {
        const Predicate* p = sig.predicate(kw);
        if (!p || head.size() != 1) throw fail("unknown predicate '" + kw + "'");
        auto& set = m.pred[intern(kw)];
        for (auto& t : tuples(rest)) {
          if (static_cast<int>(t.size()) != p->arity) throw fail("tuple arity mismatch");
          set.insert(t);
        }
      }
    } catch (const std::out_of_range&) {
      throw fail("missing element");
    }
  }
  if (m.size == 0) throw Error("SyntaxError", "model has no domain line");
  return m;
}

// ---------------------------------------------------------------- oracle

std::string oracle_verdict_name(OracleVerdict v) {
  switch (v) {
    case OracleVerdict::Sat:
      return "SAT";
    case OracleVerdict::Unsat:
      return "UNSAT";
    case OracleVerdict::Unknown:
      return "UNKNOWN";
  }
  return "UNKNOWN";
}

namespace {

struct Symbol {
  enum Type { Pred, Atom, Individual } type;
  int index;
  std::size_t cells;  // table cells, or 0 for individuals
};

struct Plan {
  std::vector<Symbol> syms;
  std::vector<std::vector<int>> checks;  // per stage
  std::vector<int> unconditional;
  int root = -1;

  void assign(Evaluator& ev, const Symbol& s, std::uint64_t v) const {
    if (s.type == Symbol::Individual) {
      ev.set_individual(s.index, static_cast<int>(v));
      return;
    }
    auto& tab = s.type == Symbol::Pred ? ev.pred_table(s.index) : ev.atom_table(s.index);
    for (std::size_t k = 0; k < s.cells; ++k) tab[k] = static_cast<std::uint8_t>((v >> k) & 1U);
  }

  std::uint64_t values(const Evaluator& ev, const Symbol& s) const {
    if (s.type == Symbol::Individual) return static_cast<std::uint64_t>(ev.size());
    return std::uint64_t{1} << s.cells;
  }

  bool stage_ok(Evaluator& ev, std::size_t k) const {
    ev.clear_memo();
    for (int h : checks[k])
      if (!ev.holds(h, {})) return false;
    return true;
  }

  // Depth-first over symbols k..; stops once `stop` reports a smaller winner.
  template <class Stop>
  bool dfs(Evaluator& ev, std::size_t k, std::int64_t& count, const Stop& stop) const {
    if (stop()) return false;
    if (k == syms.size()) {
      ++count;
      ev.clear_memo();
      return ev.holds(root, {0});
    }
    const Symbol& s = syms[k];
    std::uint64_t n = values(ev, s);
    for (std::uint64_t v = 0; v < n; ++v) {
      assign(ev, s, v);
      if (!stage_ok(ev, k)) continue;
      if (dfs(ev, k + 1, count, stop)) return true;
    }
    return false;
  }
};

}  // namespace

OracleResult brute_force_sat(const NormalizedSpec& ns, const Problem& p, const OracleOptions& opt) {
  if (p.roots.empty()) throw Error("EmptyInput", "no input concepts");
  if (opt.max_size < 1) throw Error("InvalidBound", "max_size must be at least 1");
  std::vector<Id> exprs;
  for (const auto& r : p.roots) exprs.push_back(r.expr);
  std::set<Id> carrier = sub_closure(ns, exprs);

  Evaluator ev(ns);
  Id x = dvar("x");
  std::vector<F> conj;
  for (const auto& r : p.roots) conj.push_back(f_lit(mk_lit(r.positive, sym_nu(1), {r.expr, x})));
  Plan search;
  search.root = ev.compile(f_and(conj));
  std::vector<int> background;
  for (const F& s : restrict_to(background_sentences(ns), carrier)) background.push_back(ev.compile(s));

  std::vector<std::pair<int, int>> order;  // (type rank, index)
  for (std::size_t i = 0; i < ev.preds().size(); ++i) order.push_back({0, static_cast<int>(i)});
  std::vector<int> atoms(ev.atoms().size());
  std::iota(atoms.begin(), atoms.end(), 0);
  std::stable_sort(atoms.begin(), atoms.end(),
                   [&](int a, int b) { return ev.arity_of_atom(a) > ev.arity_of_atom(b); });
  for (int a : atoms) order.push_back({1, a});
  for (std::size_t i = 0; i < ev.individuals().size(); ++i) order.push_back({2, static_cast<int>(i)});

  auto bits_at = [&](int n) {
    double bits = 0;
    for (std::size_t i = 0; i < ev.preds().size(); ++i) bits += static_cast<double>(power(n, ev.arity_of_pred(static_cast<int>(i))));
    for (std::size_t i = 0; i < ev.atoms().size(); ++i) bits += static_cast<double>(power(n, ev.arity_of_atom(static_cast<int>(i))));
    bits += static_cast<double>(ev.individuals().size()) * std::log2(static_cast<double>(n));
    return bits;
  };
  if (bits_at(opt.max_size) > opt.max_bits)
    throw Error("CarrierTooLarge", std::to_string(static_cast<long>(bits_at(opt.max_size))) +
                                       " assignment bits exceed the cap of " + std::to_string(opt.max_bits));

  std::map<std::pair<int, int>, std::size_t> position;
  for (std::size_t k = 0; k < order.size(); ++k) position[order[k]] = k;
  search.checks.assign(order.size(), {});
  for (int h : background) {
    std::set<int> a, pr, in;
    ev.dependencies(h, a, pr, in);
    long stage = -1;
    for (int i : pr) stage = std::max<long>(stage, static_cast<long>(position.at({0, i})));
    for (int i : a) stage = std::max<long>(stage, static_cast<long>(position.at({1, i})));
    for (int i : in) stage = std::max<long>(stage, static_cast<long>(position.at({2, i})));
    if (stage < 0)
      search.unconditional.push_back(h);
    else
      search.checks[static_cast<std::size_t>(stage)].push_back(h);
  }

  OracleResult res;
  for (int n = 1; n <= opt.max_size; ++n) {
    ev.resize(n);
    search.syms.clear();
    for (auto [t, i] : order) {
      if (t == 0) search.syms.push_back({Symbol::Pred, i, power(n, ev.arity_of_pred(i))});
      if (t == 1) search.syms.push_back({Symbol::Atom, i, power(n, ev.arity_of_atom(i))});
      if (t == 2) search.syms.push_back({Symbol::Individual, i, 0});
    }
    bool ok = true;
    for (int h : search.unconditional) ok = ok && ev.holds(h, {});
    if (!ok) continue;
    if (search.syms.empty()) {
      ++res.structures;
      ev.clear_memo();
      if (ev.holds(search.root, {0})) {
        res.verdict = OracleVerdict::Sat;
        res.model = ev.snapshot();
        return res;
      }
      continue;
    }
    // Stage 0 is split across threads; the lowest successful item wins.
    std::vector<std::uint64_t> items;
    for (std::uint64_t v = 0; v < search.values(ev, search.syms[0]); ++v) {
      search.assign(ev, search.syms[0], v);
      if (search.stage_ok(ev, 0)) items.push_back(v);
    }
    const long count = static_cast<long>(items.size());
    std::atomic<long> best{LONG_MAX};
    std::vector<std::optional<LStructure>> found(items.size());
    std::int64_t total = 0;
    auto run_item = [&](Evaluator& local, long i, std::int64_t& cnt) {
      if (i > best.load()) return;
      search.assign(local, search.syms[0], items[static_cast<std::size_t>(i)]);
      auto stop = [&] { return best.load() < i; };
      if (search.dfs(local, 1, cnt, stop)) {
        found[static_cast<std::size_t>(i)] = local.snapshot();
        long cur = best.load();
        while (i < cur && !best.compare_exchange_weak(cur, i)) {
        }
      }
    };
    if (opt.parallel) {
#pragma omp parallel reduction(+ : total)
      {
        Evaluator local = ev;
        std::int64_t cnt = 0;
#pragma omp for schedule(dynamic, 1)
        for (long i = 0; i < count; ++i) run_item(local, i, cnt);
        total += cnt;
      }
    } else {
      Evaluator local = ev;
      for (long i = 0; i < count && best.load() == LONG_MAX; ++i) run_item(local, i, total);
    }
    res.structures += total;
    if (best.load() != LONG_MAX) {
      res.verdict = OracleVerdict::Sat;
      res.model = *found[static_cast<std::size_t>(best.load())];
      return res;
    }
  }
  res.verdict = opt.bound_conclusive ? OracleVerdict::Unsat : OracleVerdict::Unknown;
  res.reason = "no model with at most " + std::to_string(opt.max_size) + " elements";
  return res;
}

}  // namespace tabsyn
