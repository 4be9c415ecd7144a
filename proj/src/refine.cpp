#include "tabsyn/refine.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "tabsyn/presets.hpp"
#include "tabsyn/spec.hpp"

namespace tabsyn {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

std::string strip_comment(const std::string& raw) {
  std::size_t h = raw.find('#');
  return trim(h == std::string::npos ? raw : raw.substr(0, h));
}

int int_of(const std::string& w, int line) {
  try {
    std::size_t used = 0;
    int v = std::stoi(w, &used);
    if (used != w.size()) throw 0;
    return v;
  } catch (...) {
    throw Error("SyntaxError", "line " + std::to_string(line) + ": expected integer, got '" + w + "'");
  }
}

void collect_syms(Id n, const std::set<std::string>& names, std::set<std::string>& out) {
  const Node& nd = node(n);
  if ((nd.kind == Kind::DFun || nd.kind == Kind::LApp) && names.count(name_of(nd.sym)))
    out.insert(name_of(nd.sym));
  for (Id a : nd.args) collect_syms(a, names, out);
}

void recompute_fresh(const Calculus& c, Rule& r) {
  std::set<std::string> in_den, in_prem;
  for (const auto& d : r.denominators)
    for (Id l : d) collect_syms(l, c.skolems, in_den);
  for (Id l : r.premises) collect_syms(l, c.skolems, in_prem);
  r.fresh_functions.clear();
  for (const auto& f : in_den)
    if (!in_prem.count(f)) r.fresh_functions.push_back(f);
  r.produces_terms = !r.fresh_functions.empty();
}


// Backtracking match of premise patterns against a fact list.
void match_all(const std::vector<Id>& pats, std::size_t i, const std::vector<Id>& facts, Binding& b,
               const std::function<void(const Binding&)>& k) {
  if (i == pats.size()) {
    k(b);
    return;
  }
  for (Id f : facts) {
    Binding nb = b;
    if (match_vars(pats[i], f, nb)) match_all(pats, i + 1, facts, nb, k);
  }
}

bool fully_bound(Id pat, const Binding& b) {
  std::vector<Id> vs;
  ordered_vars(pat, vs);
  return std::all_of(vs.begin(), vs.end(), [&](Id v) { return b.count(v) > 0; });
}

bool derivation_rule(const Rule& r) {
  return r.kind != RuleKind::Blocking && !r.is_closure() && r.denominators.size() == 1 &&
         !r.produces_terms;
}

// One application round of the given rules over facts; returns new literals.
std::set<Id> one_round(const std::vector<const Rule*>& rules, const std::set<Id>& facts) {
  std::vector<Id> fv(facts.begin(), facts.end());
  std::set<Id> out;
  for (const Rule* r : rules) {
    Binding b;
    match_all(r->premises, 0, fv, b, [&](const Binding& th) {
      for (Id l : r->denominators[0])
        if (fully_bound(l, th)) {
          Id g = substitute(l, th);
          if (!facts.count(g)) out.insert(g);
        }
    });
  }
  return out;
}

Id freeze_var(Id v, int k) {
  std::string nm = "_k" + std::to_string(k);
  if (node(v).kind == Kind::DVar) return dconst(nm);
  return lconst(nm, node(v).sort);
}

bool is_dp(const Calculus& c, Id lit) {
  const Node& nd = node(lit);
  if (nd.kind == Kind::Atom && nd.sym == sym_eq() && nd.args.size() == 2 && nd.args[0] == nd.args[1] &&
      is_var_node(nd.args[0]))
    return true;
  return c.eq.pos != kNoId && is_domain_predication(c, lit);
}

std::string key_of(Id lit) {
  const Node& nd = node(lit);
  return (nd.kind == Kind::NegAtom ? "-" : "+") + name_of(nd.sym);
}

// Every theta(D') of a must contain some denominator of b.
bool subsumes(const Rule& a, const Rule& b) {
  if (a.kind == RuleKind::Blocking || b.kind == RuleKind::Blocking) return false;
  bool found = false;
  Binding start;
  match_all(a.premises, 0, b.premises, start, [&](const Binding& th) {
    if (found) return;
    for (const auto& da : a.denominators) {
      std::set<Id> img;
      for (Id l : da) img.insert(substitute(l, th));
      bool covered = std::any_of(b.denominators.begin(), b.denominators.end(), [&](const auto& db) {
        return std::all_of(db.begin(), db.end(), [&](Id l) { return img.count(l) > 0; });
      });
      if (!covered) return;
    }
    if (a.is_closure() || !b.is_closure()) found = true;
  });
  return found;
}

bool is_decomposition(const Rule& r) {
  return r.kind == RuleKind::DecompPos || r.kind == RuleKind::DecompNeg;
}

}  // namespace

// ---------------------------------------------------------------- Tr context

const TemplateText* TrContext::find(const std::string& pred, bool positive) const {
  for (const auto& t : templates)
    if (t.pred == pred && t.positive == positive) return &t;
  return nullptr;
}

TrContext parse_ctx(const std::string& text) {
  TrContext ctx;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = strip_comment(raw);
    if (s.empty()) continue;
    std::size_t colon = s.find(':');
    auto fail = [&](const std::string& m) {
      return Error("SyntaxError", "line " + std::to_string(line) + ": " + m);
    };
    if (colon == std::string::npos) throw fail("expected ':'");
    auto head = words(s.substr(0, colon));
    std::string rest = trim(s.substr(colon + 1));
    if (head.empty()) throw fail("empty directive");
    if (head[0] == "connective") {
      if (head.size() != 2) throw fail("expected 'connective <name>: sorts -> sort'");
      Connective cn;
      cn.name = head[1];
      std::size_t arrow = rest.find("->");
      if (arrow == std::string::npos) throw fail("expected '->'");
      for (const auto& w : words(rest.substr(0, arrow))) cn.arg_sorts.push_back(int_of(w, line));
      cn.result_sort = int_of(trim(rest.substr(arrow + 2)), line);
      ctx.connectives.push_back(cn);
    } else if (head[0] == "individual") {
      if (head.size() != 2 || words(rest).size() != 1) throw fail("expected 'individual <x>: <l>'");
      ctx.epsilon[head[1]] = rest;
    } else if (head[0] == "function") {
      if (head.size() != 2 || words(rest).size() != 1) throw fail("expected 'function <g>: <name>'");
      ctx.functions[head[1]] = rest;
    } else {
      if (head.size() < 2 || (head[1] != "+" && head[1] != "-"))
        throw fail("expected '<pred> +|- <params>: <concept>'");
      TemplateText t;
      t.pred = head[0];
      t.positive = head[1] == "+";
      t.params.assign(head.begin() + 2, head.end());
      t.expr = rest;
      if (ctx.find(t.pred, t.positive)) throw fail("duplicate template for " + t.pred + " " + head[1]);
      ctx.templates.push_back(t);
    }
  }
  std::set<std::string> images;
  for (const auto& [x, l] : ctx.epsilon)
    if (!images.insert(l).second)
      throw Error("SyntaxError", "individual mapping is not injective at '" + l + "'");
  return ctx;
}

std::string print_ctx(const TrContext& ctx) {
  std::ostringstream os;
  for (const auto& cn : ctx.connectives) {
    os << "connective " << cn.name << ":";
    for (int s : cn.arg_sorts) os << " " << s;
    os << " -> " << cn.result_sort << "\n";
  }
  for (const auto& [x, l] : ctx.epsilon) os << "individual " << x << ": " << l << "\n";
  for (const auto& [g, f] : ctx.functions) os << "function " << g << ": " << f << "\n";
  for (const auto& t : ctx.templates) {
    os << t.pred << " " << (t.positive ? "+" : "-");
    for (const auto& p : t.params) os << " " << p;
    os << ": " << t.expr << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------- scripts

RefinementScript parse_script(const std::string& text) {
  RefinementScript sc;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = strip_comment(raw);
    if (s.empty()) continue;
    auto ws = words(s);
    auto fail = [&](const std::string& m) {
      return Error("SyntaxError", "line " + std::to_string(line) + ": " + m);
    };
    RefineStep st;
    if (ws[0] == "rf") {
      if (ws.size() < 3) throw fail("expected 'rf <rule> fold=<i,j> [drop-dp] [unsafe]'");
      st.type = RefineStep::Type::Rf;
      st.rule_id = ws[1];
      for (std::size_t i = 2; i < ws.size(); ++i) {
        if (ws[i].rfind("fold=", 0) == 0) {
          std::string list = ws[i].substr(5);
          std::stringstream ls(list);
          std::string item;
          while (std::getline(ls, item, ',')) {
            int k = int_of(item, line);
            if (k < 1) throw fail("denominator indices start at 1");
            st.fold.push_back(k - 1);
          }
        } else if (ws[i] == "drop-dp") {
          st.drop_dp = true;
        } else if (ws[i] == "unsafe") {
          st.unsafe = true;
        } else {
          throw fail("unknown rf option '" + ws[i] + "'");
        }
      }
      if (st.fold.empty()) throw fail("rf needs fold=<indices>");
    } else if (ws[0] == "tr") {
      if (ws.size() != 2) throw fail("expected 'tr <context file>'");
      st.type = RefineStep::Type::Tr;
      st.ctx = ws[1];
    } else if (ws[0] == "simplify") {
      if (ws.size() != 1) throw fail("simplify takes no arguments");
      st.type = RefineStep::Type::Simplify;
    } else if (ws[0] == "drop") {
      if (ws.size() != 2) throw fail("expected 'drop <rule>'");
      st.type = RefineStep::Type::Drop;
      st.rule_id = ws[1];
    } else if (ws[0] == "ub") {
      st.type = RefineStep::Type::Ub;
      st.ub.enabled = true;
      for (std::size_t i = 1; i < ws.size(); ++i) {
        if (ws[i].rfind("depth=", 0) != 0) throw fail("unknown ub option '" + ws[i] + "'");
        st.ub.depth = int_of(ws[i].substr(6), line);
        if (st.ub.depth < 0) throw fail("depth must be non-negative");
      }
    } else {
      throw fail("unknown step '" + ws[0] + "'");
    }
    sc.steps.push_back(st);
  }
  return sc;
}

std::string print_script(const RefinementScript& s) {
  std::ostringstream os;
  for (const auto& st : s.steps) {
    switch (st.type) {
      case RefineStep::Type::Rf: {
        os << "rf " << st.rule_id << " fold=";
        for (std::size_t i = 0; i < st.fold.size(); ++i) os << (i ? "," : "") << st.fold[i] + 1;
        if (st.drop_dp) os << " drop-dp";
        if (st.unsafe) os << " unsafe";
        break;
      }
      case RefineStep::Type::Tr:
        os << "tr " << st.ctx;
        break;
      case RefineStep::Type::Simplify:
        os << "simplify";
        break;
      case RefineStep::Type::Drop:
        os << "drop " << st.rule_id;
        break;
      case RefineStep::Type::Ub:
        os << "ub depth=" << st.ub.depth;
        break;
    }
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------- Rf

bool rf_whitelisted(const Calculus& c, const Rule& r, const std::vector<int>& fold) {
  for (int i : fold)
    for (Id l : r.denominators[i]) {
      if (positive(l)) return false;
      if (r.kind == RuleKind::Theory) continue;
      if (!is_decomposition(r)) return false;
      const Node& a = node(atom_of(l));
      int n = nu_index(a.sym);
      if (n < 0) {
        if (a.sym == sym_eq() || a.sym == sym_holds() || a.sym == sym_bot()) return false;
        continue;
      }
      if (n == 0) return false;
      for (const auto& cn : c.sig.connectives)
        if (cn.result_sort == n) return false;
    }
  return true;
}

Calculus refine_rule(const Calculus& c, const std::string& id, const std::vector<int>& fold,
                     bool drop_dp, bool unsafe) {
  const Rule* r = c.find(id);
  if (!r) throw Error("NoSuchRule", id);
  if (r->denominators.empty()) throw Error("NoDenominator", id + " has no denominator");
  std::set<int> fs(fold.begin(), fold.end());
  if (fs.empty()) throw Error("NoDenominator", "no denominator selected for " + id);
  for (int i : fs)
    if (i < 0 || i >= static_cast<int>(r->denominators.size()))
      throw Error("NoDenominator", id + " has no denominator " + std::to_string(i + 1));
  std::vector<int> fv(fs.begin(), fs.end());
  bool safe = rf_whitelisted(c, *r, fv);
  if (!safe && !unsafe)
    throw Error("UnsafeRefinement",
                "folding " + id + " is outside the admissible patterns; acknowledge with unsafe");

  std::vector<std::vector<Id>> rest;
  for (std::size_t i = 0; i < r->denominators.size(); ++i)
    if (!fs.count(static_cast<int>(i))) rest.push_back(r->denominators[i]);

  // Cross product of one literal choice per folded denominator.
  std::vector<std::vector<Id>> choices{{}};
  for (int i : fv) {
    std::vector<std::vector<Id>> next;
    for (const auto& ch : choices)
      for (Id l : r->denominators[i]) {
        auto e = ch;
        e.push_back(complement(l));
        next.push_back(e);
      }
    choices = next;
  }

  std::vector<Rule> made;
  for (std::size_t j = 0; j < choices.size(); ++j) {
    Rule nr;
    nr.id = choices.size() == 1 ? r->id : r->id + "_" + std::to_string(j + 1);
    nr.kind = r->kind;
    nr.origin = r->origin;
    nr.premises = r->premises;
    for (Id l : choices[j])
      if (std::find(nr.premises.begin(), nr.premises.end(), l) == nr.premises.end())
        nr.premises.push_back(l);
    nr.denominators = rest;
    if (drop_dp) {
      std::vector<Id> kept;
      for (std::size_t k = 0; k < nr.premises.size(); ++k) {
        Id l = nr.premises[k];
        bool drop = false;
        if (is_dp(c, l)) {
          std::vector<Id> vs;
          ordered_vars(l, vs);
          drop = true;
          for (Id v : vs) {
            bool elsewhere = false;
            for (std::size_t m = 0; m < nr.premises.size() && !elsewhere; ++m) {
              if (m == k || is_dp(c, nr.premises[m])) continue;
              std::vector<Id> ws;
              ordered_vars(nr.premises[m], ws);
              elsewhere = std::find(ws.begin(), ws.end(), v) != ws.end();
            }
            drop = drop && elsewhere;
          }
        }
        if (!drop) kept.push_back(l);
      }
      nr.premises = kept;
    }
    if (nr.denominators.empty()) nr.kind = RuleKind::Closure;
    recompute_fresh(c, nr);
    nr.note = r->note;
    if (!safe) nr.note = "completeness not guaranteed";
    made.push_back(nr);
  }

  Calculus out = c;
  out.rules.clear();
  for (const auto& x : c.rules) {
    if (x.id != id) {
      out.rules.push_back(x);
      continue;
    }
    for (auto& m : made) {
      if (m.id != id && c.find(m.id)) throw Error("DuplicateRule", m.id);
      out.rules.push_back(m);
    }
  }
  return out;
}

// ---------------------------------------------------------------- Tr

namespace {

struct CompiledTemplate {
  std::vector<Id> params;
  Id expr = kNoId;
};

struct Translator {
  const Calculus& in;
  const TrContext& ctx;
  Signature lsig;  // target object-language signature
  std::map<std::string, CompiledTemplate> templates;
  std::map<Id, Id> var_map;

  std::string key(const std::string& p, bool pos) { return p + (pos ? "+" : "-"); }

  const CompiledTemplate& get(const std::string& pred, bool pos) {
    auto it = templates.find(key(pred, pos));
    if (it == templates.end())
      throw Error("IncompleteContext", "no template for " + pred + (pos ? " +" : " -"));
    return it->second;
  }

  Id term(Id t) {
    const Node& nd = node(t);
    switch (nd.kind) {
      case Kind::DVar: {
        auto it = var_map.find(t);
        if (it != var_map.end()) return it->second;
        std::string x = name_of(nd.sym);
        std::string l = ctx.epsilon.count(x) ? ctx.epsilon.at(x) : "l" + x;
        if (lsig.lvars.count(l) && lsig.lvars.at(l) != 0)
          throw Error("IllSorted", "individual variable '" + l + "' clashes with an object variable");
        if (!lsig.lvars.count(l)) {
          lsig.lvars[l] = 0;
          lsig.lvar_order.push_back(l);
        }
        Id v = lvar(l, 0);
        for (const auto& [from, to] : var_map)
          if (to == v) throw Error("IllSorted", "individual mapping is not injective at '" + l + "'");
        var_map[t] = v;
        return v;
      }
      case Kind::DConst:
        if (!lsig.lconsts.count(name_of(nd.sym))) lsig.lconsts[name_of(nd.sym)] = 0;
        return lconst(name_of(nd.sym), 0);
      case Kind::Nu0:
        return nd.args[0];
      case Kind::DFun: {
        std::string g = name_of(nd.sym);
        std::string f = ctx.functions.count(g) ? ctx.functions.at(g) : g;
        std::vector<Id> args;
        for (Id a : nd.args) args.push_back(is_lexpr(a) ? a : term(a));
        if (!lsig.connective(f)) {
          Connective cn;
          cn.name = f;
          for (Id a : args) cn.arg_sorts.push_back(node(a).sort);
          cn.result_sort = 0;
          lsig.add_connective(cn);
        }
        return mk(Kind::LApp, intern(f), 0, std::move(args));
      }
      default:
        return t;
    }
  }

  Id apply(const CompiledTemplate& t, const std::vector<Id>& vals) {
    Binding b;
    for (std::size_t i = 0; i < t.params.size(); ++i) b[t.params[i]] = vals[i];
    return mk_atom(sym_holds(), {substitute(t.expr, b)});
  }

  // Returns kNoId for literals that vanish (object-level equalities).
  Id literal(Id lit) {
    if (is_bot(lit) || is_top(lit)) return lit;
    bool pos = positive(lit);
    const Node& a = node(atom_of(lit));
    if (a.sym == sym_holds()) throw Error("IncompleteContext", "calculus is already internalized");
    int n = nu_index(a.sym);
    std::vector<Id> vals;
    std::string pred;
    if (n >= 0) {
      pred = "nu" + std::to_string(n);
      vals.push_back(a.args[0]);
      for (std::size_t i = 1; i < a.args.size(); ++i) vals.push_back(term(a.args[i]));
    } else if (a.sym == sym_eq()) {
      if (is_lexpr(a.args[0])) return kNoId;
      pred = "eq";
      for (Id x : a.args) vals.push_back(term(x));
    } else {
      pred = name_of(a.sym);
      for (Id x : a.args) vals.push_back(term(x));
    }
    const CompiledTemplate& t = get(pred, pos);
    if (t.params.size() != vals.size())
      throw Error("IncompleteContext", "template " + pred + " expects " +
                                           std::to_string(t.params.size()) + " parameters");
    return apply(t, vals);
  }
};

}  // namespace

Calculus internalize(const Calculus& c, const TrContext& ctx) {
  if (c.internalized) throw Error("IncompleteContext", "calculus is already internalized");
  Translator tr{c, ctx, {}, {}, {}};
  Signature& ls = tr.lsig;
  ls.max_sort = c.sig.max_sort;
  ls.sort_names = c.sig.sort_names;
  ls.connectives = c.sig.connectives;
  ls.lvars = c.sig.lvars;
  ls.lconsts = c.sig.lconsts;
  ls.lvar_order = c.sig.lvar_order;
  for (const auto& cn : ctx.connectives) {
    if (ls.connective(cn.name)) throw Error("DuplicateDefinition", "connective " + cn.name);
    ls.add_connective(cn);
  }

  // Compile templates: parameters are typed by position.
  Signature psig = ls;
  psig.lvars.clear();
  psig.lvar_order.clear();
  for (const auto& t : ctx.templates) {
    ParseContext pc;
    pc.sig = &psig;
    pc.mode = ParseMode::Strict;
    int n = t.pred.size() > 2 && t.pred.rfind("nu", 0) == 0 ? nu_index(intern(t.pred)) : -1;
    CompiledTemplate ct;
    for (std::size_t i = 0; i < t.params.size(); ++i) {
      int so = (n >= 1 && i == 0) ? n : 0;
      if (pc.local_sorts.count(t.params[i]))
        throw Error("SyntaxError", "repeated template parameter " + t.params[i]);
      pc.local_sorts[t.params[i]] = so;
      ct.params.push_back(lvar(t.params[i], so));
    }
    ct.expr = parse_lexpr(t.expr, pc, 1);
    std::set<Id> vs;
    collect_lvars(ct.expr, vs);
    for (Id v : vs)
      if (std::find(ct.params.begin(), ct.params.end(), v) == ct.params.end())
        throw Error("SyntaxError", "template " + t.pred + " uses undeclared variable " + show(v));
    tr.templates[tr.key(t.pred, t.positive)] = ct;
  }

  Calculus out;
  out.internalized = true;
  out.skolems = c.skolems;
  out.ub = c.ub;
  out.notes = c.notes;
  for (const auto& r : c.rules) {
    Rule nr = r;
    nr.premises.clear();
    nr.denominators.clear();
    for (Id l : r.premises) {
      Id t = tr.literal(l);
      if (t != kNoId && std::find(nr.premises.begin(), nr.premises.end(), t) == nr.premises.end())
        nr.premises.push_back(t);
    }
    for (const auto& d : r.denominators) {
      std::vector<Id> nd;
      for (Id l : d) {
        Id t = tr.literal(l);
        if (t != kNoId && std::find(nd.begin(), nd.end(), t) == nd.end()) nd.push_back(t);
      }
      nr.denominators.push_back(nd);
    }
    out.rules.push_back(nr);
  }

  // Views and decoding entries.
  auto register_params = [&](const CompiledTemplate& t) {
    for (Id p : t.params) {
      std::string nm = name_of(node(p).sym);
      if (!ls.lvars.count(nm)) {
        ls.lvars[nm] = node(p).sort;
        ls.lvar_order.push_back(nm);
      } else if (ls.lvars.at(nm) != node(p).sort) {
        throw Error("IllSorted", "template parameter " + nm + " clashes with an object variable");
      }
    }
  };
  const CompiledTemplate& ep = tr.get("eq", true);
  const CompiledTemplate& en = tr.get("eq", false);
  const CompiledTemplate& rp = tr.get("nu1", true);
  const CompiledTemplate& rn = tr.get("nu1", false);
  if (ep.params.size() != 2 || en.params.size() != 2 || rp.params.size() != 2 ||
      rn.params.size() != 2)
    throw Error("IncompleteContext", "eq and nu1 templates take two parameters");
  for (const auto& [k, t] : tr.templates) register_params(t);
  out.eq.a = ep.params[0];
  out.eq.b = ep.params[1];
  out.eq.pos = tr.apply(ep, {out.eq.a, out.eq.b});
  out.eq.neg = tr.apply(en, {out.eq.a, out.eq.b});
  out.root.expr = rp.params[0];
  out.root.label = rp.params[1];
  out.root.pos = tr.apply(rp, {out.root.expr, out.root.label});
  out.root.neg = tr.apply(rn, {out.root.expr, out.root.label});
  for (const auto& t : ctx.templates) {
    const CompiledTemplate& ct = tr.templates.at(tr.key(t.pred, t.positive));
    out.decode.push_back(DecodeEntry{t.pred, t.positive, ct.params, ct.expr});
  }
  out.sig = ls;
  return out;
}

// ---------------------------------------------------------------- simplify

namespace {

bool present_mod_sym(const Calculus& c, Id lit, const std::set<Id>& prem, bool sym) {
  if (is_top(lit) || prem.count(lit)) return true;
  if (!sym) return false;
  Id a, b;
  for (bool pol : {true, false})
    if (c.match_eq(lit, pol, a, b) && prem.count(c.eq_lit(pol, b, a))) return true;
  return false;
}

// Index of a rule deriving b = a from a = b, or -1.
int symmetry_rule(const Calculus& c) {
  if (c.eq.pos == kNoId) return -1;
  Rule probe;
  probe.premises = {c.eq_lit(true, c.eq.a, c.eq.b)};
  probe.denominators = {{c.eq_lit(true, c.eq.b, c.eq.a)}};
  int best = -1;
  for (std::size_t i = 0; i < c.rules.size(); ++i)
    if (c.rules[i].denominators.size() == 1 && subsumes(c.rules[i], probe) &&
        subsumes(probe, c.rules[i]) && (best < 0 || is_decomposition(c.rules[best])))
      best = static_cast<int>(i);
  return best;
}

}  // namespace

Calculus simplify(const Calculus& c, SimplifyReport* report) {
  Calculus out = c;
  auto removed = [&](const Rule& r, const std::string& why) {
    if (report) report->removed.push_back(r.id + ": " + why);
  };
  // S0: literal hygiene.
  for (auto& r : out.rules) {
    std::vector<Id> ps;
    for (Id l : r.premises)
      if (!is_top(l) && std::find(ps.begin(), ps.end(), l) == ps.end()) ps.push_back(l);
    r.premises = ps;
    for (auto& d : r.denominators) {
      std::vector<Id> nd;
      for (Id l : d)
        if (!is_top(l) && std::find(nd.begin(), nd.end(), l) == nd.end()) nd.push_back(l);
      d = nd;
    }
  }
  // S1: some denominator already among the premises.
  {
    std::vector<Rule> kept;
    int sym = symmetry_rule(out);
    for (std::size_t i = 0; i < out.rules.size(); ++i) {
      const Rule& r = out.rules[i];
      std::set<Id> prem(r.premises.begin(), r.premises.end());
      bool use_sym = sym >= 0 && sym != static_cast<int>(i);
      bool trivial = r.kind != RuleKind::Blocking &&
                     std::any_of(r.denominators.begin(), r.denominators.end(), [&](const auto& d) {
                       return std::all_of(d.begin(), d.end(), [&](Id l) {
                         return present_mod_sym(out, l, prem, use_sym);
                       });
                     });
      if (trivial)
        removed(r, "conclusion among premises");
      else
        kept.push_back(r);
    }
    out.rules = kept;
  }
  // S2: instance subsumption.
  auto s2 = [&]() {
    std::vector<bool> dead(out.rules.size(), false);
    for (std::size_t i = 0; i < out.rules.size(); ++i) {
      if (dead[i]) continue;
      for (std::size_t j = 0; j < out.rules.size(); ++j) {
        if (i == j || dead[j] || dead[i]) continue;
        const Rule& a = out.rules[i];
        const Rule& b = out.rules[j];
        if (!subsumes(a, b)) continue;
        if (subsumes(b, a)) {
          bool drop_a = (is_decomposition(a) && !is_decomposition(b)) ||
                         (is_decomposition(a) == is_decomposition(b) && i > j);
          if (drop_a) {
            dead[i] = true;
            removed(a, "variant of " + b.id);
            continue;
          }
        }
        dead[j] = true;
        removed(b, "instance of " + a.id);
      }
    }
    std::vector<Rule> kept;
    for (std::size_t i = 0; i < out.rules.size(); ++i)
      if (!dead[i]) kept.push_back(out.rules[i]);
    out.rules = kept;
  };
  s2();
  // S3: prune conclusions derivable in one step from the premises.
  {
    std::vector<bool> dead(out.rules.size(), false);
    for (std::size_t i = 0; i < out.rules.size(); ++i) {
      Rule& r = out.rules[i];
      if (r.kind == RuleKind::Blocking || r.is_closure()) continue;
      std::vector<const Rule*> others;
      for (std::size_t j = 0; j < out.rules.size(); ++j)
        if (j != i && !dead[j] && derivation_rule(out.rules[j])) others.push_back(&out.rules[j]);
      std::set<Id> facts(r.premises.begin(), r.premises.end());
      std::set<Id> derived = one_round(others, facts);
      derived.insert(facts.begin(), facts.end());
      bool empty = false;
      for (auto& d : r.denominators) {
        std::vector<Id> nd;
        for (Id l : d) {
          if (derived.count(l)) {
            if (report) report->pruned.push_back(r.id + ": " + show(l));
          } else {
            nd.push_back(l);
          }
        }
        d = nd;
        empty = empty || d.empty();
      }
      if (empty) {
        dead[i] = true;
        removed(r, "conclusion derivable by other rules");
      } else {
        recompute_fresh(out, r);
      }
    }
    std::vector<Rule> kept;
    for (std::size_t i = 0; i < out.rules.size(); ++i)
      if (!dead[i]) kept.push_back(out.rules[i]);
    out.rules = kept;
  }
  s2();
  // S4: rules whose premises can never be produced.
  {
    std::set<std::string> live;
    if (out.root.pos != kNoId) {
      live.insert(key_of(out.root.pos));
      live.insert(key_of(out.root.neg));
    }
    std::vector<bool> active(out.rules.size(), false);
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < out.rules.size(); ++i) {
        if (active[i]) continue;
        const Rule& r = out.rules[i];
        bool ok = std::all_of(r.premises.begin(), r.premises.end(),
                              [&](Id l) { return live.count(key_of(l)) > 0; });
        if (!ok) continue;
        active[i] = true;
        changed = true;
        for (const auto& d : r.denominators)
          for (Id l : d)
            if (!is_bot(l)) live.insert(key_of(l));
      }
    }
    std::vector<Rule> kept;
    for (std::size_t i = 0; i < out.rules.size(); ++i) {
      if (active[i] || out.rules[i].kind == RuleKind::Blocking)
        kept.push_back(out.rules[i]);
      else
        removed(out.rules[i], "premises never produced");
    }
    out.rules = kept;
  }
  return out;
}

Calculus drop_rule(const Calculus& c, const std::string& id, int rounds) {
  const Rule* r = c.find(id);
  if (!r) throw Error("NoSuchRule", id);
  std::vector<const Rule*> others;
  for (const auto& x : c.rules)
    if (x.id != id && derivation_rule(x)) others.push_back(&x);
  std::vector<Id> vs;
  for (Id l : r->premises) ordered_vars(l, vs);
  for (const auto& d : r->denominators)
    for (Id l : d) ordered_vars(l, vs);
  Binding fz;
  for (std::size_t k = 0; k < vs.size(); ++k) fz[vs[k]] = freeze_var(vs[k], static_cast<int>(k));
  std::set<Id> facts;
  for (Id l : r->premises) facts.insert(substitute(l, fz));
  auto holds_den = [&]() {
    if (r->is_closure()) {
      for (const auto& x : c.rules) {
        if (!x.is_closure() || x.id == id) continue;
        bool hit = false;
        Binding b;
        std::vector<Id> fv(facts.begin(), facts.end());
        match_all(x.premises, 0, fv, b, [&](const Binding&) { hit = true; });
        if (hit) return true;
      }
      return false;
    }
    return std::any_of(r->denominators.begin(), r->denominators.end(), [&](const auto& d) {
      return std::all_of(d.begin(), d.end(),
                         [&](Id l) { return is_top(l) || facts.count(substitute(l, fz)) > 0; });
    });
  };
  for (int k = 0; k <= rounds && !holds_den(); ++k) {
    auto add = one_round(others, facts);
    if (add.empty()) break;
    facts.insert(add.begin(), add.end());
  }
  if (!holds_den())
    throw Error("NotDerivable", id + " is not derivable from the remaining rules");
  Calculus out = c;
  out.rules.erase(std::remove_if(out.rules.begin(), out.rules.end(),
                                 [&](const Rule& x) { return x.id == id; }),
                  out.rules.end());
  return out;
}

// ---------------------------------------------------------------- ub

Calculus attach_ub(const Calculus& c, const UbConfig& cfg) {
  if (!cfg.enabled) return c;
  if (c.eq.pos == kNoId || c.eq.neg == kNoId)
    throw Error("NoEqualityAvailable", "calculus has no equality view");
  if (cfg.depth < 0) throw Error("SyntaxError", "blocking depth must be non-negative");
  Calculus out = c;
  Id a = c.eq.a, b = c.eq.b;
  bool have = std::any_of(c.rules.begin(), c.rules.end(),
                          [](const Rule& r) { return r.kind == RuleKind::Blocking; });
  if (!have) {
    Rule ub;
    ub.id = "ub";
    ub.kind = RuleKind::Blocking;
    ub.premises = {c.eq_lit(true, a, a), c.eq_lit(true, b, b)};
    ub.denominators = {{c.eq_lit(true, a, b)}, {c.eq_lit(false, a, b)}};
    ub.origin = "blocking";
    out.rules.push_back(ub);
  }
  Rule clash;
  clash.id = "eq_clash";
  clash.kind = RuleKind::Closure;
  clash.premises = {c.eq_lit(true, a, b), c.eq_lit(false, a, b)};
  bool covered = std::any_of(c.rules.begin(), c.rules.end(), [&](const Rule& r) {
    return r.is_closure() && r.kind != RuleKind::Blocking && subsumes(r, clash);
  });
  if (!covered) {
    while (out.find(clash.id)) clash.id += "_";
    out.rules.push_back(clash);
  }
  out.ub = cfg;
  return out;
}

// ---------------------------------------------------------------- scripts

const std::string* preset_resource(const std::string& name) {
  static const std::map<std::string, std::string> table = {
      {"so.refine", std::string(presets::kSoRefine)},
      {"ipc.refine", std::string(presets::kIpcRefine)},
      {"tr/so.ctx", std::string(presets::kSoCtx)},
      {"so.ctx", std::string(presets::kSoCtx)},
  };
  auto it = table.find(name);
  return it == table.end() ? nullptr : &it->second;
}

Calculus apply_script(const Calculus& c, const RefinementScript& s, const RefineOptions& opt,
                      std::vector<std::string>* log) {
  auto load = opt.load ? opt.load : [](const std::string& name) -> std::string {
    if (std::filesystem::exists(name)) return read_file(name);
    if (const std::string* p = preset_resource(name)) return *p;
    throw Error("FileNotFound", name);
  };
  auto note = [&](const std::string& m) {
    if (log) log->push_back(m);
  };
  Calculus cur = c;
  for (const auto& st : s.steps) {
    switch (st.type) {
      case RefineStep::Type::Rf:
        cur = refine_rule(cur, st.rule_id, st.fold, st.drop_dp, st.unsafe || opt.unsafe);
        note("rf " + st.rule_id);
        break;
      case RefineStep::Type::Tr:
        cur = internalize(cur, parse_ctx(load(st.ctx)));
        note("tr " + st.ctx);
        break;
      case RefineStep::Type::Simplify: {
        SimplifyReport rep;
        cur = simplify(cur, &rep);
        for (const auto& r : rep.removed) note("simplify removed " + r);
        for (const auto& r : rep.pruned) note("simplify pruned " + r);
        break;
      }
      case RefineStep::Type::Drop:
        cur = drop_rule(cur, st.rule_id);
        note("drop " + st.rule_id);
        break;
      case RefineStep::Type::Ub:
        cur = attach_ub(cur, st.ub);
        note("ub depth=" + std::to_string(st.ub.depth));
        break;
    }
  }
  return cur;
}

}  // namespace tabsyn
