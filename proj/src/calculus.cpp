#include "tabsyn/calculus.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

namespace tabsyn {

std::string kind_name(RuleKind k) {
  switch (k) {
    case RuleKind::DecompPos:
      return "decomposition+";
    case RuleKind::DecompNeg:
      return "decomposition-";
    case RuleKind::Theory:
      return "theory";
    case RuleKind::Equality:
      return "equality";
    case RuleKind::Closure:
      return "closure";
    case RuleKind::Blocking:
      return "blocking";
  }
  return "theory";
}

RuleKind parse_kind(const std::string& s) {
  if (s == "decomposition+") return RuleKind::DecompPos;
  if (s == "decomposition-") return RuleKind::DecompNeg;
  if (s == "theory") return RuleKind::Theory;
  if (s == "equality") return RuleKind::Equality;
  if (s == "closure") return RuleKind::Closure;
  if (s == "blocking") return RuleKind::Blocking;
  throw Error("SyntaxError", "unknown rule kind '" + s + "'");
}

const Rule* Calculus::find(const std::string& id) const {
  for (const auto& r : rules)
    if (r.id == id) return &r;
  return nullptr;
}

Rule* Calculus::find(const std::string& id) {
  for (auto& r : rules)
    if (r.id == id) return &r;
  return nullptr;
}

Id Calculus::eq_lit(bool positive, Id a, Id b) const {
  return substitute(positive ? eq.pos : eq.neg, Binding{{eq.a, a}, {eq.b, b}});
}

bool Calculus::match_eq(Id lit, bool positive, Id& a, Id& b) const {
  Binding bd;
  if (!match_vars(positive ? eq.pos : eq.neg, lit, bd)) return false;
  a = bd.at(eq.a);
  b = bd.at(eq.b);
  return true;
}

Id Calculus::root_lit(bool positive, Id expr, Id label) const {
  return substitute(positive ? root.pos : root.neg, Binding{{root.expr, expr}, {root.label, label}});
}

void set_default_views(Calculus& c) {
  c.eq.a = dvar("x");
  c.eq.b = dvar("y");
  c.eq.pos = mk_lit(true, sym_eq(), {c.eq.a, c.eq.b});
  c.eq.neg = mk_lit(false, sym_eq(), {c.eq.a, c.eq.b});
  c.root.label = dvar("x");
  c.root.expr = lvar("p", 1);
  c.root.pos = mk_lit(true, sym_nu(1), {c.root.expr, c.root.label});
  c.root.neg = mk_lit(false, sym_nu(1), {c.root.expr, c.root.label});
}

bool is_var_node(Id n) {
  Kind k = node(n).kind;
  return k == Kind::LVar || k == Kind::DVar || k == Kind::PVar;
}

void ordered_vars(Id n, std::vector<Id>& out) {
  if (is_var_node(n)) {
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
    return;
  }
  for (Id a : node(n).args) ordered_vars(a, out);
}

bool is_domain_predication(const Calculus& c, Id lit) {
  Id a, b;
  return c.match_eq(lit, true, a, b) && a == b && is_var_node(a);
}

// ---------------------------------------------------------------- printing

namespace {

std::string sort_word(int s) { return s == kDomainSort ? "D" : std::to_string(s); }

std::string lit_list(const std::vector<Id>& ls) {
  std::string s;
  for (std::size_t i = 0; i < ls.size(); ++i) {
    if (i) s += ", ";
    s += show(ls[i]);
  }
  return s;
}

}  // namespace

std::string print_rule(const Rule& r) {
  std::string s = "rule " + r.id + " [" + kind_name(r.kind) + "]: " + lit_list(r.premises) + " / ";
  if (r.denominators.empty()) return s + "bot";
  for (std::size_t i = 0; i < r.denominators.size(); ++i) {
    if (i) s += " | ";
    s += lit_list(r.denominators[i]);
  }
  return s;
}

std::string print_calculus(const Calculus& c) {
  const Signature& sig = c.sig;
  std::ostringstream os;
  os << "# tableau calculus\n";
  for (const auto& [so, nm] : sig.sort_names) {
    os << "sort " << so << " " << nm << ":";
    for (const auto& v : sig.lvar_order)
      if (sig.lvars.at(v) == so) os << " " << v;
    os << "\n";
  }
  std::map<int, std::vector<std::string>> consts;
  for (const auto& [n, so] : sig.lconsts) consts[so].push_back(n);
  for (const auto& [so, cs] : consts) {
    os << "consts " << so << ":";
    for (const auto& n : cs) os << " " << n;
    os << "\n";
  }
  os << "domain:";
  for (const auto& v : sig.domain_vars) os << " " << v;
  os << "\n";
  for (const auto& cn : sig.connectives) {
    os << "connective " << cn.name << ":";
    for (int s : cn.arg_sorts) os << " " << s;
    os << " -> " << cn.result_sort << "\n";
  }
  for (const auto& p : sig.predicates) os << "predicate " << p.name << ": " << p.arity << "\n";
  for (const auto& f : sig.functions) {
    os << "function " << f.name << ":";
    for (int s : f.arg_sorts) os << " " << sort_word(s);
    os << "\n";
  }
  for (const auto& s : c.skolems) os << "skolem " << s << "\n";
  if (c.internalized) os << "internalized\n";
  os << "equality " << show(c.eq.a) << " " << show(c.eq.b) << ": " << show(c.eq.pos) << " | "
     << show(c.eq.neg) << "\n";
  os << "root " << show(c.root.label) << " " << show(c.root.expr) << ": " << show(c.root.pos)
     << " | " << show(c.root.neg) << "\n";
  for (const auto& d : c.decode) {
    os << "decode " << d.pred << " " << (d.positive ? "+" : "-");
    for (Id p : d.params) os << " " << show(p);
    os << ": " << show(d.expr) << "\n";
  }
  if (c.ub.enabled) os << "blocking " << c.ub.depth << "\n";
  for (const auto& n : c.notes) os << "note " << n << "\n";
  os << "rules\n";
  for (const auto& r : c.rules) os << print_rule(r) << "\n";
  for (const auto& r : c.rules)
    if (!r.note.empty()) os << "flag " << r.id << ": " << r.note << "\n";
  return os.str();
}

// ---------------------------------------------------------------- parsing

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

// Splits at top-level occurrences of sep (outside parentheses).
std::vector<std::string> split_top(const std::string& s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char ch : s) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  return out;
}

int sort_from(const std::string& w, int line) {
  if (w == "D") return kDomainSort;
  try {
    return std::stoi(w);
  } catch (...) {
    throw Error("SyntaxError", "line " + std::to_string(line) + ": bad sort '" + w + "'");
  }
}

}  // namespace

Calculus parse_calculus(const std::string& text) {
  Calculus c;
  Signature& sig = c.sig;
  sig.sort_names.clear();
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  bool in_rules = false;
  bool views = false;
  ParseContext ctx;
  ctx.sig = &sig;
  ctx.mode = ParseMode::Strict;
  auto fail = [&](const std::string& m) -> Error {
    return Error("SyntaxError", "line " + std::to_string(line) + ": " + m);
  };
  auto lit = [&](const std::string& s) {
    try {
      return parse_literal(s, ctx);
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line) + ": " + e.what());
    }
  };
  auto var = [&](const std::string& w) -> Id {
    if (sig.lvars.count(w)) return lvar(w, sig.lvars.at(w));
    if (sig.is_domain_var(w)) return dvar(w);
    throw fail("unknown variable '" + w + "'");
  };
  while (std::getline(in, raw)) {
    ++line;
    std::size_t h = raw.find('#');
    std::string s = trim(h == std::string::npos ? raw : raw.substr(0, h));
    if (s.empty()) continue;
    auto ws = words(s);
    const std::string& kw = ws[0];
    std::size_t colon = s.find(':');
    std::string rest = colon == std::string::npos ? "" : trim(s.substr(colon + 1));
    if (kw == "rules") {
      in_rules = true;
      if (!views) set_default_views(c);
      continue;
    }
    if (kw == "rule") {
      if (!in_rules) throw fail("rule before 'rules'");
      std::size_t lb = s.find('['), rb = s.find(']');
      if (lb == std::string::npos || rb == std::string::npos || colon == std::string::npos)
        throw fail("expected 'rule <id> [<kind>]: ...'");
      colon = s.find(':', rb);
      Rule r;
      r.id = trim(s.substr(4, lb - 4));
      r.kind = parse_kind(trim(s.substr(lb + 1, rb - lb - 1)));
      std::string body = trim(s.substr(colon + 1));
      auto halves = split_top(body, '/');
      if (halves.size() != 2) throw fail("expected exactly one '/'");
      for (const auto& p : split_top(halves[0], ','))
        if (!p.empty()) r.premises.push_back(lit(p));
      if (halves[1] != "bot") {
        for (const auto& d : split_top(halves[1], '|')) {
          std::vector<Id> den;
          for (const auto& l : split_top(d, ','))
            if (!l.empty()) den.push_back(lit(l));
          r.denominators.push_back(den);
        }
      }
      std::set<std::string> fresh;
      std::function<void(Id)> walk = [&](Id n) {
        const Node& nd = node(n);
        if ((nd.kind == Kind::DFun || nd.kind == Kind::LApp) && c.skolems.count(name_of(nd.sym)))
          fresh.insert(name_of(nd.sym));
        for (Id a : nd.args) walk(a);
      };
      for (const auto& den : r.denominators)
        for (Id l : den) walk(l);
      std::set<std::string> in_prem;
      std::function<void(Id)> walkp = [&](Id n) {
        const Node& nd = node(n);
        if ((nd.kind == Kind::DFun || nd.kind == Kind::LApp) && c.skolems.count(name_of(nd.sym)))
          in_prem.insert(name_of(nd.sym));
        for (Id a : nd.args) walkp(a);
      };
      for (Id l : r.premises) walkp(l);
      for (const auto& f : fresh)
        if (!in_prem.count(f)) r.fresh_functions.push_back(f);
      r.produces_terms = !r.fresh_functions.empty();
      if (c.find(r.id)) throw fail("duplicate rule id " + r.id);
      c.rules.push_back(std::move(r));
      continue;
    }
    if (kw == "flag") {
      std::string id = trim(s.substr(4, colon - 4));
      Rule* r = c.find(id);
      if (!r) throw fail("flag for unknown rule " + id);
      r->note = rest;
      continue;
    }
    if (in_rules) throw fail("unexpected line after 'rules'");
    if (kw == "sort") {
      if (ws.size() < 3) throw fail("expected 'sort <n> <name>: vars'");
      int so = sort_from(ws[1], line);
      std::string nm = ws[2];
      if (!nm.empty() && nm.back() == ':') nm.pop_back();
      sig.sort_names[so] = nm;
      sig.max_sort = std::max(sig.max_sort, so);
      for (const auto& v : words(rest)) {
        sig.lvars[v] = so;
        sig.lvar_order.push_back(v);
      }
    } else if (kw == "consts") {
      int so = sort_from(trim(s.substr(6, colon - 6)), line);
      for (const auto& v : words(rest)) sig.lconsts[v] = so;
    } else if (kw == "domain:" || kw == "domain") {
      for (const auto& v : words(rest)) sig.domain_vars.push_back(v);
    } else if (kw == "connective") {
      Connective cn;
      cn.name = trim(s.substr(10, colon - 10));
      std::size_t arrow = rest.find("->");
      if (arrow == std::string::npos) throw fail("expected '->'");
      for (const auto& w : words(rest.substr(0, arrow))) cn.arg_sorts.push_back(sort_from(w, line));
      cn.result_sort = sort_from(trim(rest.substr(arrow + 2)), line);
      sig.add_connective(cn);
    } else if (kw == "predicate") {
      Predicate p;
      p.name = trim(s.substr(9, colon - 9));
      p.arity = sort_from(rest, line);
      sig.add_predicate(p);
    } else if (kw == "function") {
      FunctionSym f;
      f.name = trim(s.substr(8, colon - 8));
      for (const auto& w : words(rest)) f.arg_sorts.push_back(sort_from(w, line));
      sig.add_function(f);
    } else if (kw == "skolem") {
      if (ws.size() != 2) throw fail("expected 'skolem <name>'");
      c.skolems.insert(ws[1]);
      for (auto& f : sig.functions)
        if (f.name == ws[1]) f.skolem = true;
    } else if (kw == "internalized") {
      c.internalized = true;
    } else if (kw == "equality" || kw == "root") {
      auto head = words(s.substr(0, colon));
      if (head.size() != 3) throw fail("expected '" + kw + " <v1> <v2>: <pos> | <neg>'");
      auto lits = split_top(rest, '|');
      if (lits.size() != 2) throw fail("expected two literals separated by '|'");
      if (!views) set_default_views(c);
      views = true;
      if (kw == "equality") {
        c.eq.a = var(head[1]);
        c.eq.b = var(head[2]);
        c.eq.pos = lit(lits[0]);
        c.eq.neg = lit(lits[1]);
      } else {
        c.root.label = var(head[1]);
        c.root.expr = var(head[2]);
        c.root.pos = lit(lits[0]);
        c.root.neg = lit(lits[1]);
      }
    } else if (kw == "decode") {
      auto head = words(s.substr(0, colon));
      if (head.size() < 4) throw fail("expected 'decode <pred> <+|-> <params>: <expr>'");
      DecodeEntry d;
      d.pred = head[1];
      d.positive = head[2] == "+";
      for (std::size_t i = 3; i < head.size(); ++i) d.params.push_back(var(head[i]));
      d.expr = parse_lexpr(rest, ctx, 1);
      c.decode.push_back(d);
    } else if (kw == "blocking") {
      c.ub.enabled = true;
      c.ub.depth = ws.size() > 1 ? std::stoi(ws[1]) : 0;
    } else if (kw == "note") {
      c.notes.push_back(trim(s.substr(4)));
    } else {
      throw fail("unknown directive '" + kw + "'");
    }
  }
  if (!in_rules) throw Error("SyntaxError", "missing 'rules' section");
  if (!sig.sort_names.count(0)) sig.sort_names[0] = "individual";
  return c;
}

// ---------------------------------------------------------------- canonical form

namespace {

struct Renderer {
  const std::set<std::string>* skolems;
  const std::map<std::string, std::string>* skmap;  // null: mask
  std::map<Id, std::string> names;
  std::map<int, int> counters;
  std::vector<std::string> sk_order;

  void name_vars(Id n) {
    std::vector<Id> vs;
    ordered_vars(n, vs);
    for (Id v : vs)
      if (!names.count(v)) {
        int so = node(v).sort;
        std::string pre = node(v).kind == Kind::DVar ? "d" : "v" + std::to_string(so) + "_";
        names[v] = pre + std::to_string(counters[so + 10]++);
      }
  }

  std::string render(Id n) {
    const Node& nd = node(n);
    if (is_var_node(n)) {
      auto it = names.find(n);
      return it == names.end() ? "?" + std::to_string(nd.sort) : it->second;
    }
    std::string head = nd.kind == Kind::NegAtom ? "not(" + name_of(nd.sym) : name_of(nd.sym);
    if ((nd.kind == Kind::DFun || nd.kind == Kind::LApp) && skolems->count(head)) {
      if (std::find(sk_order.begin(), sk_order.end(), head) == sk_order.end()) sk_order.push_back(head);
      head = skmap ? (skmap->count(head) ? skmap->at(head) : "SK?") : "SK";
    }
    std::string s = head;
    if (!nd.args.empty()) {
      s += "(";
      for (std::size_t i = 0; i < nd.args.size(); ++i) {
        if (i) s += ",";
        s += render(nd.args[i]);
      }
      s += ")";
    }
    if (nd.kind == Kind::NegAtom) s += ")";
    return s;
  }
};

struct Canon {
  std::string text;
  std::vector<std::string> sk_order;
};

Canon canon_rule(const Rule& r, const std::set<std::string>& skolems,
                 const std::map<std::string, std::string>* skmap) {
  std::vector<std::size_t> perm(r.premises.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  bool exhaustive = perm.size() <= 7;
  Canon best;
  bool have = false;
  do {
    Renderer rd{&skolems, skmap, {}, {}, {}};
    for (std::size_t i : perm) rd.name_vars(r.premises[i]);
    std::string s = kind_name(r.kind) + ": ";
    for (std::size_t k = 0; k < perm.size(); ++k) {
      if (k) s += ", ";
      s += rd.render(r.premises[perm[k]]);
    }
    s += " / ";
    std::vector<std::string> dens;
    for (const auto& d : r.denominators) {
      std::vector<std::string> ls;
      for (Id l : d) ls.push_back(rd.render(l));
      std::sort(ls.begin(), ls.end());
      ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
      std::string ds;
      for (std::size_t i = 0; i < ls.size(); ++i) ds += (i ? ", " : "") + ls[i];
      dens.push_back(ds);
    }
    std::sort(dens.begin(), dens.end());
    if (dens.empty()) s += "bot";
    for (std::size_t i = 0; i < dens.size(); ++i) s += (i ? " | " : "") + dens[i];
    if (!have || s < best.text) {
      best.text = s;
      best.sk_order = rd.sk_order;
      have = true;
    }
    if (!exhaustive) break;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

std::vector<std::string> canonical_form(const Calculus& c) {
  std::vector<std::pair<Canon, const Rule*>> masked;
  for (const auto& r : c.rules) masked.push_back({canon_rule(r, c.skolems, nullptr), &r});
  std::stable_sort(masked.begin(), masked.end(),
                   [](const auto& a, const auto& b) { return a.first.text < b.first.text; });
  std::map<std::string, std::string> skmap;
  for (const auto& [cn, r] : masked)
    for (const auto& s : cn.sk_order)
      if (!skmap.count(s)) skmap[s] = "SK" + std::to_string(skmap.size());
  std::vector<std::string> out;
  for (const auto& r : c.rules) out.push_back(canon_rule(r, c.skolems, &skmap).text);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> canonical_diff(const Calculus& a, const Calculus& b) {
  auto ca = canonical_form(a);
  auto cb = canonical_form(b);
  std::vector<std::string> out;
  std::multiset<std::string> ma(ca.begin(), ca.end()), mb(cb.begin(), cb.end());
  for (const auto& s : ma)
    if (ma.count(s) > mb.count(s)) out.push_back("- " + s);
  for (const auto& s : mb)
    if (mb.count(s) > ma.count(s)) out.push_back("+ " + s);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace tabsyn
