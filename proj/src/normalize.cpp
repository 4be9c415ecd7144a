#include "tabsyn/normalize.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace tabsyn {

F Xi::sentence() const {
  return positive ? f_forall(qvars, f_implies(f_atom(head), body))
                  : f_forall(qvars, f_implies(body, f_atom(head)));
}

const Xi* NormalizedSpec::plus_for(const std::string& conn) const {
  for (const auto& x : s_plus)
    if (x.connective == conn) return &x;
  return nullptr;
}

const Xi* NormalizedSpec::minus_for(const std::string& conn) const {
  for (const auto& x : s_minus)
    if (x.connective == conn) return &x;
  return nullptr;
}

std::optional<std::pair<Id, F>> NormalizedSpec::definition_of(Sym conn) const {
  const std::string& n = name_of(conn);
  for (const auto& d : s0)
    if (d.connective == n) return std::make_pair(d.head, d.body);
  if (const Xi* x = plus_for(n)) return std::make_pair(x->head, x->body);
  return std::nullopt;
}

namespace {

bool all_atomic(Id n) {
  const Node& nd = node(n);
  if (nd.kind == Kind::LApp) return false;
  for (Id a : nd.args)
    if (!all_atomic(a)) return false;
  return true;
}

std::string head_connective(Id head) {
  Id e = node(head).args[0];
  const Node& en = node(e);
  if (en.kind != Kind::LApp) return "";
  std::set<Id> seen;
  for (Id a : en.args)
    if (node(a).kind != Kind::LVar || !seen.insert(a).second) return "";
  return name_of(en.sym);
}

void check_xi(const Xi& x) {
  std::set<Id> hv, bv;
  collect_lvars(x.head, hv);
  collect_lvars(x.body, bv);
  for (Id v : bv)
    if (!hv.count(v))
      throw Error("ExtraBodyVariable", show(v) + " in the body of " + x.name);
}

Xi from_implication(const Sentence& s, bool positive) {
  Implication imp = split_implication(s.formula);
  const F& h = positive ? imp.antecedent : imp.consequent;
  Xi x;
  x.name = s.name;
  x.positive = positive;
  x.qvars = imp.qvars;
  x.head = h->atom;
  x.body = positive ? imp.consequent : imp.antecedent;
  x.connective = head_connective(x.head);
  return x;
}

// Merges x into list when a member has the same head up to renaming.
void add_merged(std::vector<Xi>& list, Xi x) {
  check_xi(x);
  for (auto& y : list) {
    Binding fwd, back;
    if (match_vars(y.head, x.head, fwd) && match_vars(x.head, y.head, back)) {
      F body = substitute(x.body, back);
      y.body = y.positive ? f_and({y.body, body}) : f_or({y.body, body});
      return;
    }
  }
  list.push_back(std::move(x));
}

}  // namespace

NormalizedSpec normalize(const SemanticSpec& spec) {
  NormalizedSpec ns;
  ns.sig = spec.sig;
  ns.s0 = spec.s0;
  ns.default_equality = spec.default_equality;
  for (const auto& s : spec.sb) {
    std::vector<Id> atoms;
    collect_atoms(s.formula, atoms);
    for (Id a : atoms)
      if (!all_atomic(a)) throw Error("NonAtomicBackground", s.name + ": " + show(a));
    ns.sb.push_back(s);
  }
  for (const auto& d : spec.s0) {
    Xi p;
    p.name = d.name;
    p.connective = d.connective;
    p.positive = true;
    p.qvars = d.qvars;
    p.head = d.head;
    p.body = d.body;
    Xi m = p;
    m.positive = false;
    add_merged(ns.s_plus, p);
    add_merged(ns.s_minus, m);
  }
  for (const auto& s : spec.s_plus) add_merged(ns.s_plus, from_implication(s, true));
  for (const auto& s : spec.s_minus) add_merged(ns.s_minus, from_implication(s, false));
  return ns;
}

// ---------------------------------------------------------------- ordering

bool InducedOrdering::less(Id a, Id b) const {
  std::set<Id> seen{a};
  std::vector<Id> work{a};
  while (!work.empty()) {
    Id c = work.back();
    work.pop_back();
    for (const auto& [lo, hi] : edges) {
      if (lo != c) continue;
      if (hi == b) return true;
      if (seen.insert(hi).second) work.push_back(hi);
    }
  }
  return false;
}

InducedOrdering induced_ordering(const NormalizedSpec& ns) {
  InducedOrdering ord;
  std::set<std::pair<Id, Id>> seen;
  auto harvest = [&](const Xi& x) {
    std::set<Id> exprs;
    collect_lexprs(x.body, exprs);
    for (Id e : exprs)
      if (seen.insert({e, x.head_expr()}).second) ord.edges.push_back({e, x.head_expr()});
  };
  for (const auto& x : ns.s_plus) harvest(x);
  for (const auto& x : ns.s_minus) harvest(x);
  for (const auto& [lo, hi] : ord.edges)
    if (ord.less(hi, lo) || lo == hi) ord.acyclic = false;
  return ord;
}

namespace {
bool occurs_in(Id needle, Id hay) {
  if (needle == hay) return true;
  for (Id a : node(hay).args)
    if (occurs_in(needle, a)) return true;
  return false;
}
}  // namespace

WfResult check_well_founded(const InducedOrdering& ord) {
  WfResult r;
  bool all_proper = true;
  for (const auto& [lo, hi] : ord.edges) {
    if (occurs_in(hi, lo)) {
      r.verdict = WfVerdict::SelfLoopOrCycle;
      r.witness = show(lo) + " < " + show(hi);
      return r;
    }
    if (!occurs_in(lo, hi)) all_proper = false;
  }
  if (!ord.acyclic) {
    r.verdict = WfVerdict::SelfLoopOrCycle;
    r.witness = "cycle in the schematic ordering";
    return r;
  }
  r.verdict = all_proper ? WfVerdict::ProvedWF : WfVerdict::Unknown;
  return r;
}

std::set<Id> sub_closure(const NormalizedSpec& ns, const std::vector<Id>& exprs) {
  std::set<Id> out;
  std::vector<Id> work(exprs.begin(), exprs.end());
  auto visit = [&](const Xi& x, Id e) {
    Binding b;
    if (!match_vars(x.head_expr(), e, b)) return;
    std::set<Id> lower;
    collect_lexprs(x.body, lower);
    for (Id l : lower) work.push_back(substitute(l, b));
  };
  while (!work.empty()) {
    Id e = work.back();
    work.pop_back();
    if (!out.insert(e).second) continue;
    for (const auto& x : ns.s_plus) visit(x, e);
    for (const auto& x : ns.s_minus) visit(x, e);
  }
  return out;
}

// ---------------------------------------------------------------- TPTP export

namespace {

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_')
      out += c;
    else if (c == '\'')
      out += "_p";
    else
      out += "_";
  }
  return out;
}

class TptpWriter {
 public:
  TptpWriter(const Signature& sig) : sig_(sig), dsort_(sig.max_sort + 1) {}

  std::string guard(int sort, const std::string& v) const {
    return "sort_" + std::to_string(sort < 0 ? dsort_ : sort) + "(" + v + ")";
  }

  std::string var_name(Id v) const {
    const Node& n = node(v);
    return (n.kind == Kind::LVar ? "L_" : "D_") + sanitize(name_of(n.sym));
  }

  // Fixed L-variables are rendered as constants.
  std::set<Id> fixed;

  std::string term(Id e) const {
    const Node& n = node(e);
    auto args = [&]() {
      std::string s = "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) s += ",";
        s += term(n.args[i]);
      }
      return s + ")";
    };
    switch (n.kind) {
      case Kind::LVar:
        if (fixed.count(e)) return "k_" + sanitize(name_of(n.sym));
        return var_name(e);
      case Kind::DVar:
        return var_name(e);
      case Kind::LConst:
        return "k_" + sanitize(name_of(n.sym));
      case Kind::DConst:
        return "d_" + sanitize(name_of(n.sym));
      case Kind::LApp:
        return "c_" + sanitize(name_of(n.sym)) + (n.args.empty() ? "" : args());
      case Kind::DFun:
        return "f_" + sanitize(name_of(n.sym)) + (n.args.empty() ? "" : args());
      case Kind::Nu0:
        return "nu0" + args();
      default:
        throw Error("TptpExport", "unexpected node " + show(e));
    }
  }

  std::string atom(Id a) const {
    const Node& n = node(a);
    if (n.sym == sym_bot()) return "$false";
    if (n.sym == sym_eq()) return "(" + term(n.args[0]) + " = " + term(n.args[1]) + ")";
    std::string head = nu_index(n.sym) >= 1 ? name_of(n.sym) : "p_" + sanitize(name_of(n.sym));
    std::string s = head + "(";
    for (std::size_t i = 0; i < n.args.size(); ++i) {
      if (i) s += ",";
      s += term(n.args[i]);
    }
    return s + ")";
  }

  std::string quant(bool univ, const std::vector<std::pair<std::string, int>>& vs,
                    const std::string& body) const {
    if (vs.empty()) return body;
    std::string s = univ ? "(! [" : "(? [";
    std::string g;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      if (i) {
        s += ",";
        g += " & ";
      }
      s += vs[i].first;
      g += guard(vs[i].second, vs[i].first);
    }
    if (vs.size() > 1) g = "(" + g + ")";
    return s + "] : (" + g + (univ ? " => " : " & ") + body + "))";
  }

  std::string formula(const F& f) const {
    auto join = [&](const std::string& op) {
      std::string s = "(";
      for (std::size_t i = 0; i < f->kids.size(); ++i) {
        if (i) s += " " + op + " ";
        s += formula(f->kids[i]);
      }
      return s + ")";
    };
    switch (f->kind) {
      case FKind::Atom:
        return atom(f->atom);
      case FKind::Bot:
        return "$false";
      case FKind::Top:
        return "$true";
      case FKind::Not:
        return "~ " + formula(f->kids[0]);
      case FKind::And:
        return join("&");
      case FKind::Or:
        return join("|");
      case FKind::Implies:
        return "(" + formula(f->kids[0]) + " => " + formula(f->kids[1]) + ")";
      case FKind::Iff:
        return "(" + formula(f->kids[0]) + " <=> " + formula(f->kids[1]) + ")";
      case FKind::Forall:
      case FKind::Exists: {
        std::vector<std::pair<std::string, int>> vs;
        for (Id v : f->vars) vs.push_back({var_name(v), node(v).sort});
        return quant(f->kind == FKind::Forall, vs, formula(f->kids[0]));
      }
    }
    return "$true";
  }

  // Universal closure over the free, non-fixed L-variables.
  std::string closed(const F& f) const {
    std::set<Id> lv;
    collect_lvars(f, lv);
    std::vector<std::pair<std::string, int>> vs;
    for (Id v : lv)
      if (!fixed.count(v)) vs.push_back({var_name(v), node(v).sort});
    return quant(true, vs, formula(f));
  }

  std::vector<std::string> typing() const {
    std::vector<std::string> out;
    for (const auto& c : sig_.connectives) {
      std::vector<std::pair<std::string, int>> vs;
      std::string app = "c_" + sanitize(c.name);
      if (!c.arg_sorts.empty()) {
        app += "(";
        for (std::size_t i = 0; i < c.arg_sorts.size(); ++i) {
          std::string v = "A" + std::to_string(i + 1);
          vs.push_back({v, c.arg_sorts[i]});
          if (i) app += ",";
          app += v;
        }
        app += ")";
      }
      out.push_back("fof(type_" + sanitize(c.name) + ", axiom, " +
                    quant(true, vs, guard(c.result_sort, app)) + ").");
    }
    out.push_back("fof(type_nu0, axiom, " + quant(true, {{"A1", 0}}, guard(kDomainSort, "nu0(A1)")) +
                  ").");
    for (Id v : fixed)
      out.push_back("fof(type_k_" + sanitize(name_of(node(v).sym)) + ", axiom, " +
                    guard(node(v).sort, term(v)) + ").");
    return out;
  }

 private:
  const Signature& sig_;
  int dsort_;
};

std::string header(const std::string& title) {
  return "% " + title + "\n% sorts are encoded by unary guard predicates sort_i\n";
}

}  // namespace

std::vector<Obligation> emit_wd_obligations(const NormalizedSpec& ns) {
  std::vector<Obligation> out;
  std::vector<F> s0;
  for (const auto& d : ns.s0) s0.push_back(d.sentence());
  std::vector<F> sb;
  for (const auto& s : ns.sb) sb.push_back(s.formula);

  {
    TptpWriter w(ns.sig);
    std::ostringstream os;
    os << header("wd1: the specification follows from its definitions and background theory");
    bool trivial = !ns.s0.empty();
    for (const auto& x : ns.s_plus) {
      bool found = false;
      for (const auto& d : ns.s0) found |= d.connective == x.connective && !x.connective.empty();
      trivial &= found;
    }
    for (const auto& x : ns.s_minus) {
      bool found = false;
      for (const auto& d : ns.s0) found |= d.connective == x.connective && !x.connective.empty();
      trivial &= found;
    }
    if (ns.s_plus.empty() && ns.s_minus.empty()) trivial = true;
    if (trivial) os << "% status: discharged, every sentence of S is a member of S0 or Sb\n";
    for (const auto& t : w.typing()) os << t << "\n";
    int k = 0;
    for (const auto& f : s0) os << "fof(def_" << ++k << ", axiom, " << w.closed(f) << ").\n";
    k = 0;
    for (const auto& f : sb) os << "fof(bg_" << ++k << ", axiom, " << w.closed(f) << ").\n";
    std::vector<std::string> goals;
    for (const auto& x : ns.s_plus) goals.push_back(w.closed(x.sentence()));
    for (const auto& x : ns.s_minus) goals.push_back(w.closed(x.sentence()));
    for (const auto& f : sb) goals.push_back(w.closed(f));
    std::string g = "$true";
    if (!goals.empty()) {
      g = "(";
      for (std::size_t i = 0; i < goals.size(); ++i) g += (i ? " & " : "") + goals[i];
      g += ")";
      if (goals.size() == 1) g = goals[0];
    }
    os << "fof(wd1, conjecture, " << g << ").\n";
    out.push_back({"wd1", "wd1.p", os.str(), trivial});
  }

  for (const auto& c : ns.sig.connectives) {
    const Xi* plus = ns.plus_for(c.name);
    const Xi* minus = ns.minus_for(c.name);
    const Definition* def = nullptr;
    for (const auto& d : ns.s0)
      if (d.connective == c.name) def = &d;
    if (!def) continue;
    TptpWriter w(ns.sig);
    Id hexpr = node(def->head).args[0];
    std::set<Id> params;
    collect_lvars(hexpr, params);
    w.fixed = params;
    // Rename the halves onto the definition's variables.
    auto body_of = [&](const Xi* x) -> F {
      if (!x) return nullptr;
      Binding b;
      if (!match_vars(x->head, def->head, b)) return nullptr;
      return substitute(x->body, b);
    };
    F phi_plus = body_of(plus);
    F phi_minus = body_of(minus);
    std::set<Id> lower;
    collect_lexprs(def->body, lower);
    if (plus) collect_lexprs(plus->body, lower);
    std::vector<F> restricted = restrict_to(sb, lower);

    std::ostringstream os;
    os << header("wd3' obligation for connective " + c.name);
    for (const auto& t : w.typing()) os << t << "\n";
    {
      TptpWriter open(ns.sig);
      int k = 0;
      for (const auto& f : s0) os << "fof(def_" << ++k << ", axiom, " << open.closed(f) << ").\n";
    }
    int k = 0;
    for (const auto& f : restricted) os << "fof(bg_" << ++k << ", axiom, " << w.closed(f) << ").\n";
    std::vector<F> parts;
    if (phi_plus) parts.push_back(f_implies(phi_plus, def->body));
    if (phi_minus) parts.push_back(f_implies(def->body, phi_minus));
    F goal = f_forall(def->qvars, f_and(parts));
    os << "fof(wd3_" << sanitize(c.name) << ", conjecture, " << w.formula(goal) << ").\n";
    std::string nm = "wd3_" + sanitize(c.name);
    out.push_back({nm, nm + ".p", os.str(), false});
  }
  return out;
}

// ---------------------------------------------------------------- TPTP check

namespace {

class TptpChecker {
 public:
  explicit TptpChecker(const std::string& t) : s_(t) {}

  std::vector<std::string> run() {
    try {
      skip();
      while (i_ < s_.size()) {
        annotated();
        skip();
      }
    } catch (const std::string& e) {
      errors_.push_back(e);
    }
    return errors_;
  }

 private:
  [[noreturn]] void fail(const std::string& m) {
    std::size_t line = 1 + static_cast<std::size_t>(std::count(s_.begin(), s_.begin() + static_cast<long>(std::min(i_, s_.size())), '\n'));
    throw "line " + std::to_string(line) + ": " + m;
  }

  void skip() {
    while (i_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[i_]))) {
        ++i_;
      } else if (s_[i_] == '%') {
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
      } else if (s_.compare(i_, 2, "/*") == 0) {
        std::size_t e = s_.find("*/", i_ + 2);
        if (e == std::string::npos) fail("unterminated comment");
        i_ = e + 2;
      } else {
        break;
      }
    }
  }

  bool lit(const std::string& t) {
    skip();
    if (s_.compare(i_, t.size(), t) == 0) {
      i_ += t.size();
      return true;
    }
    return false;
  }

  void want(const std::string& t) {
    if (!lit(t)) fail("expected '" + t + "'");
  }

  bool peek(const std::string& t) {
    skip();
    return s_.compare(i_, t.size(), t) == 0;
  }

  static bool alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  // word: returns the identifier at the cursor, or "" if none.
  std::string word() {
    skip();
    std::size_t j = i_;
    if (j < s_.size() && s_[j] == '$') ++j;
    while (j < s_.size() && alnum(s_[j])) ++j;
    std::string w = s_.substr(i_, j - i_);
    if (w == "$" ) return "";
    i_ = j;
    return w;
  }

  static bool is_upper(const std::string& w) { return !w.empty() && std::isupper(static_cast<unsigned char>(w[0])); }
  static bool is_lower(const std::string& w) { return !w.empty() && std::islower(static_cast<unsigned char>(w[0])); }

  void annotated() {
    std::string kw = word();
    if (kw != "fof") fail("expected fof, found '" + kw + "'");
    want("(");
    std::string name = word();
    if (!is_lower(name) && !(name.size() && std::isdigit(static_cast<unsigned char>(name[0]))))
      fail("bad formula name '" + name + "'");
    want(",");
    std::string role = word();
    static const std::set<std::string> roles = {"axiom", "hypothesis", "definition", "assumption",
                                                "lemma", "theorem", "conjecture", "negated_conjecture",
                                                "plain", "unknown"};
    if (!roles.count(role)) fail("bad role '" + role + "'");
    want(",");
    bound_.clear();
    logic_formula();
    want(")");
    want(".");
  }

  void logic_formula() {
    unitary();
    if (peek("<=>") || peek("=>") || peek("<~>") || peek("~|") || peek("~&") ||
        (peek("<=") && !peek("<=>"))) {
      for (const char* op : {"<=>", "<~>", "=>", "<=", "~|", "~&"})
        if (lit(op)) break;
      unitary();
      return;
    }
    if (peek("&") || peek("|")) {
      std::string op = peek("&") ? "&" : "|";
      while (lit(op)) unitary();
      if (peek("&") || peek("|")) fail("mixed associative connectives need parentheses");
    }
  }

  void unitary() {
    skip();
    if (lit("(")) {
      logic_formula();
      want(")");
      return;
    }
    if (peek("~") && !peek("~|") && !peek("~&")) {
      want("~");
      unitary();
      return;
    }
    if (peek("!") || peek("?")) {
      ++i_;
      want("[");
      std::vector<std::string> vs;
      do {
        std::string v = word();
        if (!is_upper(v)) fail("expected variable, found '" + v + "'");
        vs.push_back(v);
      } while (lit(","));
      want("]");
      want(":");
      bound_.push_back(vs);
      unitary();
      bound_.pop_back();
      return;
    }
    atomic();
  }

  bool is_bound(const std::string& v) const {
    for (const auto& b : bound_)
      if (std::find(b.begin(), b.end(), v) != b.end()) return true;
    return false;
  }

  // Parses a term; returns true if it was a plain (possibly predicate-shaped) functional term.
  void term() {
    std::string w = word();
    if (w.empty()) fail("expected term");
    if (is_upper(w)) {
      if (!is_bound(w)) fail("free variable " + w);
      return;
    }
    if (!is_lower(w)) fail("bad term '" + w + "'");
    if (lit("(")) {
      do term();
      while (lit(","));
      want(")");
    }
  }

  void atomic() {
    std::string w = word();
    if (w == "$true" || w == "$false") return;
    if (w.empty()) fail("expected atomic formula");
    bool plain = is_lower(w);
    if (is_upper(w)) {
      if (!is_bound(w)) fail("free variable " + w);
    } else if (!plain) {
      fail("bad atomic formula '" + w + "'");
    } else if (lit("(")) {
      do term();
      while (lit(","));
      want(")");
    }
    if (peek("!=") || (peek("=") && !peek("=>"))) {
      if (!lit("!=")) want("=");
      term();
      return;
    }
    if (is_upper(w)) fail("variable used as a formula");
  }

  std::string s_;
  std::size_t i_ = 0;
  std::vector<std::vector<std::string>> bound_;
  std::vector<std::string> errors_;
};

}  // namespace

std::vector<std::string> check_tptp(const std::string& text) { return TptpChecker(text).run(); }

}  // namespace tabsyn
