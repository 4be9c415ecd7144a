#include "tabsyn/engine.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <functional>
#include <map>
#include <sstream>

namespace tabsyn {

// ---------------------------------------------------------------- problems

Problem parse_problem(const std::string& text, const Signature& sig) {
  Problem p;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  ParseContext ctx;
  ctx.sig = &sig;
  ctx.mode = ParseMode::Ground;
  bool neg_conn = sig.connective("not") != nullptr;
  while (std::getline(in, raw)) {
    ++line;
    std::size_t h = raw.find('#');
    std::string s = h == std::string::npos ? raw : raw.substr(0, h);
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    s = s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
    Problem::Root r;
    if (!neg_conn && s.rfind("not(", 0) == 0 && s.back() == ')') {
      r.positive = false;
      s = s.substr(4, s.size() - 5);
    }
    try {
      r.expr = parse_lexpr(s, ctx, 1);
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line) + ": " + e.what());
    }
    p.roots.push_back(r);
  }
  return p;
}

std::string print_problem(const Problem& p) {
  std::string s;
  for (const auto& r : p.roots) s += (r.positive ? show(r.expr) : "not(" + show(r.expr) + ")") + "\n";
  return s;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Unsatisfiable:
      return "UNSAT";
    case Verdict::Satisfiable:
      return "SAT";
    case Verdict::ResourceLimit:
      return "UNKNOWN";
  }
  return "UNKNOWN";
}

int Branch::birth(Id t) const {
  auto it = birth_.find(t);
  return it == birth_.end() ? -1 : it->second;
}

int term_order(const Branch& b, Id t, Id u) {
  int x = b.birth(t), y = b.birth(u);
  if (x < 0 || y < 0) throw Error("UnknownTerm", show(x < 0 ? t : u));
  return x < y ? -1 : (x > y ? 1 : 0);
}

// ---------------------------------------------------------------- engine

namespace {

enum Cls { kClosure = 0, kDet = 1, kBranching = 2, kUb = 3, kTerm = 4, kClasses = 5 };

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  a ^= b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2);
  a *= 0xff51afd7ed558ccdULL;
  return a ^ (a >> 33);
}

struct View {
  std::int64_t key = 0;  // predicate key with polarity
  std::vector<Id> args;
  bool wild = false;  // holds(<variable>)
};

bool is_app(Id n) {
  Kind k = node(n).kind;
  return k == Kind::LApp || k == Kind::DFun || k == Kind::Nu0 || k == Kind::LConst ||
         k == Kind::DConst;
}

View view_of(Id lit) {
  const Node& n = node(lit);
  View v;
  bool neg = n.kind == Kind::NegAtom;
  std::int64_t p = n.sym;
  v.args = n.args;
  if (n.sym == sym_holds() && n.args.size() == 1) {
    const Node& in = node(n.args[0]);
    if (in.kind == Kind::LApp) {
      p = -static_cast<std::int64_t>(in.sym) - 1;
      v.args = in.args;
    } else if (in.kind == Kind::PVar) {
      v.wild = true;
    }
  }
  v.key = p * 2 + (neg ? 1 : 0);
  return v;
}

std::uint64_t arg_key(std::int64_t key, std::size_t pos, Id arg) {
  return mix(mix(static_cast<std::uint64_t>(key), pos), static_cast<std::uint64_t>(arg));
}
std::uint64_t head_key(std::int64_t key, std::size_t pos, Sym s) {
  return mix(mix(static_cast<std::uint64_t>(key) ^ 0x5555ULL, pos + 1000),
             static_cast<std::uint64_t>(s) + 7);
}

bool has_pvar(Id n) {
  const Node& nd = node(n);
  if (nd.kind == Kind::PVar) return true;
  for (Id a : nd.args)
    if (has_pvar(a)) return true;
  return false;
}

bool pmatch(Id p, Id t, std::vector<Id>& slots) {
  const Node& pn = node(p);
  if (pn.kind == Kind::PVar) {
    Id& s = slots[pn.sym];
    if (s == kNoId) {
      if (pn.sort == kDomainSort) {
        if (!is_domain_term(t)) return false;
      } else if (!is_lexpr(t) || node(t).sort != pn.sort) {
        return false;
      }
      s = t;
      return true;
    }
    return s == t;
  }
  if (p == t) return true;
  const Node& tn = node(t);
  if (pn.kind != tn.kind || pn.sym != tn.sym || pn.args.size() != tn.args.size()) return false;
  for (std::size_t i = 0; i < pn.args.size(); ++i)
    if (!pmatch(pn.args[i], tn.args[i], slots)) return false;
  return true;
}

bool all_bound(Id p, const std::vector<Id>& slots) {
  const Node& pn = node(p);
  if (pn.kind == Kind::PVar) return slots[pn.sym] != kNoId;
  for (Id a : pn.args)
    if (!all_bound(a, slots)) return false;
  return true;
}

Id inst(Id p, const std::vector<Id>& slots) {
  const Node& pn = node(p);
  if (pn.kind == Kind::PVar) return slots[pn.sym];
  if (pn.args.empty()) return p;
  std::vector<Id> args;
  args.reserve(pn.args.size());
  bool same = true;
  for (Id a : pn.args) {
    Id x = inst(a, slots);
    same = same && x == a;
    args.push_back(x);
  }
  if (same) return p;
  return mk(pn.kind, pn.sym, pn.sort, std::move(args));
}

struct CRule {
  const Rule* rule = nullptr;
  std::vector<Id> prem;
  std::vector<View> pview;
  std::vector<std::vector<Id>> dens;
  std::vector<Id> slot_var;
  std::vector<bool> slot_domain;
  int cls = kDet;
  int ub_a = -1, ub_b = -1;
};

struct Compiler {
  std::map<Id, int> slots;
  std::vector<Id> vars;
  Id compile(Id n) {
    const Node& nd = node(n);
    if (nd.kind == Kind::LVar || nd.kind == Kind::DVar) {
      auto it = slots.find(n);
      int s;
      if (it == slots.end()) {
        s = static_cast<int>(vars.size());
        slots[n] = s;
        vars.push_back(n);
      } else {
        s = it->second;
      }
      return mk(Kind::PVar, s, nd.sort);
    }
    if (nd.args.empty()) return n;
    std::vector<Id> args;
    for (Id a : nd.args) args.push_back(compile(a));
    return mk(nd.kind, nd.sym, nd.sort, std::move(args));
  }
};

}  // namespace

// Branching point on a path; closed subtrees report the choices they depend on.
struct Choice {
  std::shared_ptr<Choice> parent;
  int level = 0;
  std::size_t pending = 0;
  int acc = 0;
  bool dead = false;
};

struct Engine::Impl {
  const Calculus& calc;
  EngineOptions opt;
  std::vector<CRule> rules;
  std::unordered_map<std::int64_t, std::vector<std::pair<int, int>>> by_key;  // key -> (rule, premise)
  std::vector<std::pair<int, int>> wild;
  Id eq_pat = kNoId;
  Id bot = kNoId, top = kNoId;
  int next_branch = 0;
  EngineStats stats;
  std::vector<std::string> trace;
  std::vector<std::string> subexpr_violations;
  std::vector<std::string> c1_violations;
  std::chrono::steady_clock::time_point start;
  bool out_of_budget = false;
  std::string budget_reason;
  std::vector<std::shared_ptr<Branch>> just_closed;

  // Dependency sets over choice levels, hash-consed; 0 is the empty set.
  std::vector<std::vector<std::uint64_t>> dep_pool{{}};
  std::map<std::vector<std::uint64_t>, int> dep_ids{{{}, 0}};
  std::unordered_map<std::uint64_t, int> union_memo;

  Impl(const Calculus& c, EngineOptions o) : calc(c), opt(std::move(o)) {
    bot = bot_lit();
    top = top_lit();
    for (std::size_t i = 0; i < c.rules.size(); ++i) {
      const Rule& r = c.rules[i];
      Compiler cp;
      CRule cr;
      cr.rule = &r;
      for (Id l : r.premises) cr.prem.push_back(cp.compile(l));
      std::size_t bound = cp.vars.size();
      for (const auto& d : r.denominators) {
        std::vector<Id> nd;
        for (Id l : d) nd.push_back(cp.compile(l));
        cr.dens.push_back(nd);
      }
      if (cp.vars.size() != bound)
        throw Error("UnboundConclusionVariable", "rule " + r.id + " has conclusion variables not in its premises");
      if (r.premises.empty()) throw Error("SyntaxError", "rule " + r.id + " has no premises");
      cr.slot_var = cp.vars;
      for (Id v : cp.vars) cr.slot_domain.push_back(node(v).sort == c.domain_sort());
      for (Id p : cr.prem) cr.pview.push_back(view_of(p));
      if (r.kind == RuleKind::Blocking) {
        cr.cls = kUb;
        for (std::size_t s = 0; s < cp.vars.size(); ++s) {
          if (cp.vars[s] == c.eq.a) cr.ub_a = static_cast<int>(s);
          if (cp.vars[s] == c.eq.b) cr.ub_b = static_cast<int>(s);
        }
      } else if (r.is_closure()) {
        cr.cls = kClosure;
      } else if (r.produces_terms || creates_terms(cr)) {
        cr.cls = kTerm;
      } else if (r.denominators.size() > 1) {
        cr.cls = kBranching;
      } else {
        cr.cls = kDet;
      }
      rules.push_back(std::move(cr));
    }
    for (std::size_t i = 0; i < rules.size(); ++i)
      for (std::size_t j = 0; j < rules[i].prem.size(); ++j) {
        if (rules[i].pview[j].wild)
          wild.push_back({static_cast<int>(i), static_cast<int>(j)});
        else
          by_key[rules[i].pview[j].key].push_back({static_cast<int>(i), static_cast<int>(j)});
      }
    if (c.eq.pos != kNoId) {
      Compiler cp;
      cp.slots[c.eq.a] = 0;
      cp.slots[c.eq.b] = 1;
      cp.vars = {c.eq.a, c.eq.b};
      eq_pat = cp.compile(c.eq.pos);
    }
  }

  // ---- dependency sets

  int intern_dep(std::vector<std::uint64_t> w) {
    while (!w.empty() && w.back() == 0) w.pop_back();
    auto [it, fresh] = dep_ids.emplace(std::move(w), static_cast<int>(dep_pool.size()));
    if (fresh) dep_pool.push_back(it->first);
    return it->second;
  }

  int dep_union(int a, int b) {
    if (a == b || b == 0) return a;
    if (a == 0) return b;
    if (a > b) std::swap(a, b);
    std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    auto it = union_memo.find(key);
    if (it != union_memo.end()) return it->second;
    std::vector<std::uint64_t> w = dep_pool[a];
    const auto& v = dep_pool[b];
    if (w.size() < v.size()) w.resize(v.size(), 0);
    for (std::size_t i = 0; i < v.size(); ++i) w[i] |= v[i];
    int r = intern_dep(std::move(w));
    union_memo.emplace(key, r);
    return r;
  }

  int dep_add(int a, int level) {
    std::vector<std::uint64_t> w = dep_pool[a];
    std::size_t i = static_cast<std::size_t>(level) / 64;
    if (w.size() <= i) w.resize(i + 1, 0);
    w[i] |= std::uint64_t{1} << (level % 64);
    return intern_dep(std::move(w));
  }

  int dep_remove(int a, int level) {
    if (!dep_has(a, level)) return a;
    std::vector<std::uint64_t> w = dep_pool[a];
    w[static_cast<std::size_t>(level) / 64] &= ~(std::uint64_t{1} << (level % 64));
    return intern_dep(std::move(w));
  }

  bool dep_has(int a, int level) const {
    const auto& w = dep_pool[a];
    std::size_t i = static_cast<std::size_t>(level) / 64;
    return i < w.size() && ((w[i] >> (level % 64)) & 1);
  }

  int premise_dep(const Branch& b, const CRule& cr, const std::vector<Id>& slots) {
    int d = 0;
    for (Id p : cr.prem) {
      auto it = b.set_.find(inst(p, slots));
      if (it != b.set_.end()) d = dep_union(d, it->second);
    }
    return d;
  }

  // Propagates a closed branch up its choice points; unused choices drop their pending siblings.
  void settle(const Branch& b) {
    int d = b.close_dep_;
    for (auto n = b.choice_; n;) {
      if (!dep_has(d, n->level)) {
        if (!n->dead && n->pending > 1) ++stats.backjumps;
        n->dead = true;
        n = n->parent;
        continue;
      }
      n->acc = dep_union(n->acc, dep_remove(d, n->level));
      if (--n->pending > 0) return;
      d = n->acc;
      n->dead = true;
      n = n->parent;
    }
  }

  static bool pruned(const Branch& b) {
    for (const Choice* n = b.choice_.get(); n; n = n->parent.get())
      if (n->dead) return true;
    return false;
  }

  // ---- indices

  static void index(Branch& b, Id lit) {
    View v = view_of(lit);
    b.by_pred_[v.key].push_back(lit);
    for (std::size_t i = 0; i < v.args.size(); ++i) {
      b.by_arg_[arg_key(v.key, i, v.args[i])].push_back(lit);
      if (is_app(v.args[i])) b.by_head_[head_key(v.key, i, node(v.args[i]).sym)].push_back(lit);
    }
  }

  const std::vector<Id>* candidates(const Branch& b, const View& pv, const std::vector<Id>& slots) const {
    if (pv.wild) return &b.lits_;
    static const std::vector<Id> empty;
    const std::vector<Id>* best = nullptr;
    auto consider = [&](const std::vector<Id>* l) {
      if (!best || l->size() < best->size()) best = l;
    };
    for (std::size_t i = 0; i < pv.args.size(); ++i) {
      Id a = pv.args[i];
      if (all_bound(a, slots)) {
        auto it = b.by_arg_.find(arg_key(pv.key, i, inst(a, slots)));
        consider(it == b.by_arg_.end() ? &empty : &it->second);
      } else if (node(a).kind != Kind::PVar) {
        auto it = b.by_head_.find(head_key(pv.key, i, node(a).sym));
        consider(it == b.by_head_.end() ? &empty : &it->second);
      }
      if (best && best->empty()) return best;
    }
    if (!best) {
      auto it = b.by_pred_.find(pv.key);
      best = it == b.by_pred_.end() ? &empty : &it->second;
    }
    return best;
  }

  void join(const Branch& b, int ri, const std::vector<int>& order, std::size_t k, std::vector<Id>& slots,
            const std::function<void(const std::vector<Id>&)>& out) const {
    if (k == order.size()) {
      out(slots);
      return;
    }
    const CRule& cr = rules[ri];
    int j = order[k];
    const std::vector<Id>* cand = candidates(b, cr.pview[j], slots);
    for (std::size_t c = 0; c < cand->size(); ++c) {
      Id lit = (*cand)[c];
      std::vector<Id> s2 = slots;
      if (pmatch(cr.prem[j], lit, s2)) join(b, ri, order, k + 1, s2, out);
    }
  }

  // ---- queueing

  Id fingerprint(int ri, const std::vector<Id>& slots) const {
    return mk(Kind::Inst, ri, kNoSort, slots);
  }

  void enqueue(Branch& b, int ri, const std::vector<Id>& slots) {
    const CRule& cr = rules[ri];
    if (cr.cls == kUb && cr.ub_a >= 0 && cr.ub_b >= 0) {
      int x = b.birth(slots[cr.ub_a]), y = b.birth(slots[cr.ub_b]);
      if (!(x >= 0 && y >= 0 && x < y)) return;
    }
    Id fp = fingerprint(ri, slots);
    if (b.applied_.count(fp) || b.queued_.count(fp)) return;
    b.queued_.insert(fp);
    b.queues_[cr.cls].push_back({fp, Instance{ri, slots}});
  }

  void match_new(Branch& b, Id lit) {
    View v = view_of(lit);
    auto run = [&](int ri, int pj) {
      const CRule& cr = rules[ri];
      std::vector<Id> slots(cr.slot_var.size(), kNoId);
      if (!pmatch(cr.prem[pj], lit, slots)) return;
      std::vector<int> order;
      for (int j = 0; j < static_cast<int>(cr.prem.size()); ++j)
        if (j != pj) order.push_back(j);
      join(b, ri, order, 0, slots, [&](const std::vector<Id>& s) { enqueue(b, ri, s); });
    };
    auto it = by_key.find(v.key);
    if (it != by_key.end())
      for (auto [ri, pj] : it->second) run(ri, pj);
    for (auto [ri, pj] : wild) run(ri, pj);
  }

  // ---- literal addition

  bool is_term(Id n) const {
    const Node& nd = node(n);
    return calc.internalized ? (is_lexpr(n) && nd.sort == 0 && nd.kind != Kind::LVar && nd.kind != Kind::PVar)
                             : (nd.kind == Kind::DConst || nd.kind == Kind::DFun || nd.kind == Kind::Nu0);
  }

  void collect_terms(Id n, std::set<Id>& out) const {
    if (is_term(n)) out.insert(n);
    for (Id a : node(n).args) collect_terms(a, out);
  }

  // Conclusions mention a compound term absent from the premises.
  bool creates_terms(const CRule& cr) const {
    std::set<Id> prem, conc;
    for (Id p : cr.prem) collect_terms(p, prem);
    for (const auto& d : cr.dens)
      for (Id l : d) collect_terms(l, conc);
    for (Id t : conc)
      if (!prem.count(t) && !node(t).args.empty()) return true;
    return false;
  }

  void register_terms(Branch& b, Id n) {
    const Node& nd = node(n);
    if (is_term(n) && !b.birth_.count(n)) {
      b.birth_[n] = static_cast<int>(b.terms_.size());
      b.terms_.push_back(n);
    }
    for (Id a : nd.args) register_terms(b, a);
  }

  void check_subexpressions(const Branch& b, Id lit) {
    if (!opt.subexpressions) return;
    std::set<Id> ls;
    collect_lexprs(lit, ls);
    for (Id e : ls)
      if (!opt.subexpressions->count(e)) {
        subexpr_violations.push_back("branch#" + std::to_string(b.id) + ": " + show(e) + " in " + show(lit));
        return;
      }
  }

  void add_literal(Branch& b, Id lit, int dep) {
    if (b.closed_ || lit == top) return;
    if (lit == bot) {
      b.closed_ = true;
      b.close_dep_ = dep;
      return;
    }
    if (!b.set_.emplace(lit, dep).second) return;
    b.lits_.push_back(lit);
    index(b, lit);
    register_terms(b, lit);
    check_subexpressions(b, lit);
    if (eq_pat != kNoId) {
      std::vector<Id> s(2, kNoId);
      if (pmatch(eq_pat, lit, s) && s[0] != s[1]) {
        int x = b.birth(s[0]), y = b.birth(s[1]);
        if (x >= 0 && y >= 0) {
          Id big = x < y ? s[1] : s[0], small = x < y ? s[0] : s[1];
          b.blocked_.insert(big);
          auto it = b.rep_.find(big);
          if (it == b.rep_.end() || b.birth(small) < b.birth(it->second.first)) b.rep_[big] = {small, dep};
        }
      }
    }
    match_new(b, lit);
  }

  // ---- application

  bool den_present(const Branch& b, const std::vector<Id>& den, const std::vector<Id>& slots) const {
    for (Id l : den) {
      Id g = inst(l, slots);
      if (g != top && !b.set_.count(g)) return false;
    }
    return true;
  }

  // A blocked Skolem term nested inside a binding.
  static bool nests_blocked(const Branch& b, Id n) {
    for (Id a : node(n).args) {
      if (!node(a).args.empty() && b.blocked_.count(a)) return true;
      if (nests_blocked(b, a)) return true;
    }
    return false;
  }

  bool is_blocked(const Branch& b, const std::vector<Id>& slots) const {
    if (b.blocked_.empty()) return false;
    for (Id v : slots)
      if (b.blocked_.count(v) || nests_blocked(b, v)) return true;
    return false;
  }

  Id representative(const Branch& b, Id t, int& dep) {
    for (auto it = b.rep_.find(t); it != b.rep_.end(); it = b.rep_.find(t)) {
      dep = dep_union(dep, it->second.second);
      t = it->second.first;
    }
    return t;
  }

  // Moves the premises of a blocked instance onto the smallest equal terms.
  void retarget(Branch& b, const CRule& cr, const std::vector<Id>& slots) {
    std::vector<Id> moved = slots;
    bool changed = false;
    int dep = premise_dep(b, cr, slots);
    for (std::size_t i = 0; i < moved.size(); ++i) {
      if (!cr.slot_domain[i] || !b.blocked_.count(moved[i])) continue;
      moved[i] = representative(b, moved[i], dep);
      changed = true;
    }
    if (!changed) return;
    for (Id v : moved)
      if (nests_blocked(b, v)) return;
    ++stats.retargeted;
    for (Id p : cr.prem) {
      add_literal(b, inst(p, moved), dep);
      if (b.closed_) return;
    }
  }

  // Returns false if the branch has no applicable instance left.
  bool next_instance(Branch& b, Instance& out, Id& fp) {
    std::int64_t depth = calc.ub.enabled ? calc.ub.depth : 0;
    int order[kClasses] = {kClosure, kDet, kBranching, kUb, kTerm};
    if (b.tp_count_ < depth) std::swap(order[3], order[4]);
    for (int ci : order) {
      if (take(b, ci, out, fp)) return true;
      if (b.closed_) return false;
    }
    return false;
  }

  // Next live instance of one priority class.
  bool take(Branch& b, int ci, Instance& out, Id& fp) {
    auto& q = b.queues_[ci];
    std::size_t& h = b.heads_[ci];
    while (h < q.size()) {
      Branch::Queued e = std::move(q[h]);
      ++h;
      b.queued_.erase(e.fp);
      if (b.applied_.count(e.fp)) continue;
      const CRule& cr = rules[e.inst.rule];
      if (cr.cls == kTerm && is_blocked(b, e.inst.slots)) {
        ++stats.blocked_instances;
        b.applied_.insert(e.fp);
        retarget(b, cr, e.inst.slots);
        if (b.closed_) return false;
        continue;
      }
      bool done = std::any_of(cr.dens.begin(), cr.dens.end(),
                              [&](const auto& d) { return den_present(b, d, e.inst.slots); });
      if (done) {
        b.applied_.insert(e.fp);
        continue;
      }
      out = std::move(e.inst);
      fp = e.fp;
      if (h > 4096 && h * 2 > q.size()) {
        q.erase(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(h));
        h = 0;
      }
      return true;
    }
    return false;
  }

  std::string show_instance(const Instance& in) const {
    const CRule& cr = rules[in.rule];
    std::string s = "{";
    for (std::size_t i = 0; i < in.slots.size(); ++i) {
      if (i) s += ", ";
      s += show(cr.slot_var[i]) + "=" + show(in.slots[i]);
    }
    return s + "}";
  }

  void log(const std::string& s) {
    if (opt.trace && trace.size() < opt.trace_cap) trace.push_back(s);
  }

  std::shared_ptr<Branch> fresh_branch() {
    auto b = std::make_shared<Branch>();
    b->id = next_branch++;
    b->queues_.resize(kClasses);
    b->heads_.assign(kClasses, 0);
    ++stats.branches;
    return b;
  }

  std::shared_ptr<Branch> copy_branch(Branch& src) {
    for (std::size_t ci = 0; ci < src.queues_.size(); ++ci) {
      auto& q = src.queues_[ci];
      q.erase(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(src.heads_[ci]));
      src.heads_[ci] = 0;
    }
    auto b = std::make_shared<Branch>(src);
    b->id = next_branch++;
    ++stats.branches;
    return b;
  }

  std::vector<std::shared_ptr<Branch>> fire(const std::shared_ptr<Branch>& b, const Instance& in, Id fp) {
    const CRule& cr = rules[in.rule];
    b->applied_.insert(fp);
    ++stats.applications;
    if (cr.cls == kTerm) {
      if (is_blocked(*b, in.slots)) c1_violations.push_back(cr.rule->id + " " + show_instance(in));
      ++b->tp_count_;
    }
    int dep = premise_dep(*b, cr, in.slots);
    if (cr.dens.empty()) {
      b->closed_ = true;
      b->close_dep_ = dep;
      just_closed.push_back(b);
      ++stats.closed;
      log("apply " + cr.rule->id + " " + show_instance(in) + " -> branch#" + std::to_string(b->id));
      log("close branch#" + std::to_string(b->id));
      return {};
    }
    std::vector<std::shared_ptr<Branch>> succ;
    succ.push_back(b);
    for (std::size_t k = 1; k < cr.dens.size(); ++k) succ.push_back(copy_branch(*b));
    if (succ.size() > 1) {
      auto ch = std::make_shared<Choice>();
      ch->parent = b->choice_;
      ch->level = b->level_;
      ch->pending = succ.size();
      for (auto& s : succ) {
        s->choice_ = ch;
        s->level_ = ch->level + 1;
      }
      dep = dep_add(dep, ch->level);
    }
    std::string line = "apply " + cr.rule->id + " " + show_instance(in) + " ->";
    for (auto& s : succ) line += " branch#" + std::to_string(s->id);
    log(line);
    std::vector<std::shared_ptr<Branch>> open;
    for (std::size_t k = 0; k < cr.dens.size(); ++k) {
      for (Id l : cr.dens[k]) add_literal(*succ[k], inst(l, in.slots), dep);
      Instance ci;
      Id cfp;
      if (succ.size() > 1 && !succ[k]->closed_ && take(*succ[k], kClosure, ci, cfp)) {
        const CRule& cc = rules[ci.rule];
        succ[k]->applied_.insert(cfp);
        ++stats.applications;
        succ[k]->closed_ = true;
        succ[k]->close_dep_ = premise_dep(*succ[k], cc, ci.slots);
        log("apply " + cc.rule->id + " " + show_instance(ci) + " -> branch#" + std::to_string(succ[k]->id));
      }
      if (succ[k]->closed_) {
        just_closed.push_back(succ[k]);
        ++stats.closed;
        log("close branch#" + std::to_string(succ[k]->id));
      } else {
        open.push_back(succ[k]);
      }
    }
    for (auto& s : succ) stats.max_branch_size = std::max(stats.max_branch_size, s->lits_.size());
    return open;
  }

  bool budget_left() {
    if (opt.max_applications > 0 && stats.applications >= opt.max_applications) {
      out_of_budget = true;
      budget_reason = "application budget exhausted";
      return false;
    }
    if (opt.max_seconds > 0 && (stats.applications & 255) == 0) {
      double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (secs > opt.max_seconds) {
        out_of_budget = true;
        budget_reason = "time budget exhausted";
        return false;
      }
    }
    return true;
  }
};

Engine::Engine(const Calculus& calc, EngineOptions opt)
    : impl_(std::make_unique<Impl>(calc, std::move(opt))) {}
Engine::~Engine() = default;

int Engine::rule_index(const std::string& id) const {
  for (std::size_t i = 0; i < impl_->rules.size(); ++i)
    if (impl_->rules[i].rule->id == id) return static_cast<int>(i);
  throw Error("NoSuchRule", id);
}

std::string Engine::show_instance(const Instance& in) const { return impl_->show_instance(in); }

std::shared_ptr<Branch> Engine::init(const Problem& p) {
  if (p.roots.empty()) throw Error("EmptyInput", "no input concepts");
  const Calculus& c = impl_->calc;
  std::set<std::string> used;
  std::function<void(Id)> walk = [&](Id n) {
    const Node& nd = node(n);
    if (nd.kind == Kind::LConst || nd.kind == Kind::DConst) used.insert(name_of(nd.sym));
    for (Id a : nd.args) walk(a);
  };
  for (const auto& r : p.roots) {
    if (sort_of(c.sig, r.expr) != 1) throw Error("IllSorted", show(r.expr) + " is not a concept");
    walk(r.expr);
  }
  std::string name = "a";
  for (int k = 0; used.count(name); ++k) name = "a" + std::to_string(k);
  root_const_ = c.internalized ? lconst(name, 0) : dconst(name);
  auto b = impl_->fresh_branch();
  for (const auto& r : p.roots) impl_->add_literal(*b, c.root_lit(r.positive, r.expr, root_const_), 0);
  return b;
}

std::vector<Instance> Engine::applicable_instances(const Branch& b, int rule) const {
  const CRule& cr = impl_->rules[rule];
  std::vector<int> order;
  for (int j = 0; j < static_cast<int>(cr.prem.size()); ++j) order.push_back(j);
  std::vector<Id> slots(cr.slot_var.size(), kNoId);
  std::vector<Instance> out;
  std::set<Id> seen;
  impl_->join(b, rule, order, 0, slots, [&](const std::vector<Id>& s) {
    Id fp = impl_->fingerprint(rule, s);
    if (b.applied_.count(fp) || !seen.insert(fp).second) return;
    out.push_back(Instance{rule, s});
  });
  return out;
}

std::vector<std::shared_ptr<Branch>> Engine::apply(const std::shared_ptr<Branch>& b, const Instance& in) {
  auto copy = impl_->copy_branch(*b);
  auto out = impl_->fire(copy, in, impl_->fingerprint(in.rule, in.slots));
  impl_->just_closed.clear();
  return out;
}

ProofResult Engine::expand(const Problem& p) {
  Impl& im = *impl_;
  im.start = std::chrono::steady_clock::now();
  ProofResult res;
  auto root = init(p);
  res.root_constant = root_const_;
  res.root_literals = root->lits_;
  std::deque<std::shared_ptr<Branch>> work;
  if (root->closed_) {
    ++im.stats.closed;
    im.log("close branch#" + std::to_string(root->id));
  } else {
    work.push_back(root);
  }
  bool dfs = im.opt.search == Search::DepthFirst;
  while (!work.empty() && !im.out_of_budget) {
    std::shared_ptr<Branch> b;
    if (dfs) {
      b = work.back();
      work.pop_back();
    } else {
      b = work.front();
      work.pop_front();
    }
    if (im.pruned(*b)) {
      im.log("prune branch#" + std::to_string(b->id));
      continue;
    }
    while (true) {
      Instance in;
      Id fp;
      if (!im.next_instance(*b, in, fp)) {
        if (b->closed_) {
          ++im.stats.closed;
          im.log("close branch#" + std::to_string(b->id));
          im.settle(*b);
          break;
        }
        im.log("saturated branch#" + std::to_string(b->id));
        b->saturated_ = true;
        res.verdict = Verdict::Satisfiable;
        res.branch = b;
        break;
      }
      if (!im.budget_left()) break;
      auto succ = im.fire(b, in, fp);
      for (const auto& c : im.just_closed) im.settle(*c);
      im.just_closed.clear();
      if (succ.size() == 1 && succ[0] == b) continue;
      if (dfs) {
        for (auto it = succ.rbegin(); it != succ.rend(); ++it) work.push_back(*it);
      } else {
        for (auto& s : succ) work.push_back(s);
      }
      break;
    }
    if (res.verdict == Verdict::Satisfiable) break;
  }
  if (res.verdict != Verdict::Satisfiable) {
    if (im.out_of_budget) {
      res.verdict = Verdict::ResourceLimit;
      res.reason = im.budget_reason;
    } else {
      res.verdict = Verdict::Unsatisfiable;
    }
  }
  im.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - im.start).count();
  res.stats = im.stats;
  res.trace = std::move(im.trace);
  res.subexpression_violations = std::move(im.subexpr_violations);
  res.blocking_violations = std::move(im.c1_violations);
  return res;
}

ProofResult prove(const Calculus& calc, const Problem& p, const EngineOptions& opt) {
  Engine e(calc, opt);
  return e.expand(p);
}

}  // namespace tabsyn
