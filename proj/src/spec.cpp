#include "tabsyn/spec.hpp"

#include <fstream>
#include <sstream>

#include "tabsyn/presets.hpp"

namespace tabsyn {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& s) {
  std::size_t h = s.find('#');
  return h == std::string::npos ? s : s.substr(0, h);
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

int parse_sort(const std::string& w, int line) {
  if (w == "D") return kDomainSort;
  try {
    std::size_t used = 0;
    int v = std::stoi(w, &used);
    if (used == w.size() && v >= 0) return v;
  } catch (...) {
  }
  throw Error("SyntaxError", "line " + std::to_string(line) + ": bad sort '" + w + "'");
}

[[noreturn]] void fail_at(int line, const std::string& code, const std::string& msg) {
  throw Error(code, "line " + std::to_string(line) + ": " + msg);
}

// Splits "name: rest" when the line starts with an identifier followed by ':'.
bool split_label(const std::string& line, std::string& label, std::string& rest) {
  std::size_t i = 0;
  while (i < line.size() && (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '_' ||
                             line[i] == '\''))
    ++i;
  if (i == 0) return false;
  std::size_t j = i;
  while (j < line.size() && line[j] == ' ') ++j;
  if (j < line.size() && line[j] == ':') {
    label = line.substr(0, i);
    rest = trim(line.substr(j + 1));
    return true;
  }
  return false;
}

void check_definition(const Signature& sig, Definition& d, int line) {
  const Node& h = node(d.head);
  int n = nu_index(h.sym);
  if (n < 1) fail_at(line, "SyntaxError", "definition head must be a nu_n atom");
  Id e = h.args[0];
  const Node& en = node(e);
  if (en.kind != Kind::LApp) fail_at(line, "SyntaxError", "definition head must apply a connective");
  d.connective = name_of(en.sym);
  std::set<Id> seen;
  for (Id a : en.args) {
    if (node(a).kind != Kind::LVar || !seen.insert(a).second)
      fail_at(line, "SyntaxError", "connective arguments in a definition head must be distinct variables");
  }
  std::set<Id> xs(d.qvars.begin(), d.qvars.end());
  std::set<Id> hx;
  for (std::size_t i = 1; i < h.args.size(); ++i) {
    if (node(h.args[i]).kind != Kind::DVar || !hx.insert(h.args[i]).second)
      fail_at(line, "SyntaxError", "domain arguments of a definition head must be distinct variables");
  }
  if (hx != xs) fail_at(line, "NotLOpen", "head domain variables must be exactly the quantified ones");
  if (contains_connective(d.body, d.connective))
    fail_at(line, "ConnectiveSelfReference",
            "definition of " + d.connective + " mentions " + d.connective);
  std::set<Id> body_lv;
  collect_lvars(d.body, body_lv);
  for (Id v : body_lv)
    if (!seen.count(v))
      fail_at(line, "NotLOpen", "body variable " + show(v) + " does not occur in the head");
  (void)sig;
}

}  // namespace

F Definition::sentence() const { return f_forall(qvars, f_iff(f_atom(head), body)); }

Implication split_implication(const F& f) {
  Implication imp;
  F cur = f;
  while (cur->kind == FKind::Forall) {
    for (Id v : cur->vars) imp.qvars.push_back(v);
    cur = cur->kids[0];
  }
  if (cur->kind != FKind::Implies) throw Error("SyntaxError", "expected an implication: " + show(f));
  imp.antecedent = cur->kids[0];
  imp.consequent = cur->kids[1];
  return imp;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IOError", "cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

SemanticSpec parse_spec(const std::string& text) {
  SemanticSpec spec;
  Signature& sig = spec.sig;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  struct Pending {
    int line;
    std::string label;
    std::string text;
    std::string section;
  };
  std::vector<Pending> sentences;
  static const std::set<std::string> kSections = {"sorts",  "predicates", "connectives", "define",
                                                  "axiom",  "axioms",     "positive",    "negative"};
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    std::string head = s;
    if (!head.empty() && head.back() == ':') head.pop_back();
    if (kSections.count(head)) {
      section = head == "axioms" ? "axiom" : head;
      continue;
    }
    if (section.empty()) fail_at(line, "SyntaxError", "content outside a section");
    if (section == "sorts") {
      std::string label, rest;
      auto ws = words(s);
      if (ws.empty()) continue;
      if (ws[0] == "domain" || ws[0] == "domain:") {
        split_label(s, label, rest);
        for (const auto& v : words(rest)) sig.domain_vars.push_back(v);
        continue;
      }
      if (ws[0] == "consts") {
        // consts <sort>: c1 c2
        std::string tail = trim(s.substr(6));
        std::size_t c = tail.find(':');
        if (c == std::string::npos) fail_at(line, "SyntaxError", "expected 'consts <sort>: names'");
        int so = parse_sort(trim(tail.substr(0, c)), line);
        for (const auto& v : words(tail.substr(c + 1))) sig.lconsts[v] = so;
        continue;
      }
      // <n> <name>: vars...
      std::size_t c = s.find(':');
      if (c == std::string::npos) fail_at(line, "SyntaxError", "expected '<sort> <name>: variables'");
      auto lhs = words(s.substr(0, c));
      if (lhs.size() != 2) fail_at(line, "SyntaxError", "expected '<sort> <name>: variables'");
      int so = parse_sort(lhs[0], line);
      if (so < 0) fail_at(line, "SyntaxError", "object-language sorts are non-negative");
      if (sig.sort_names.count(so)) fail_at(line, "SyntaxError", "sort declared twice");
      sig.sort_names[so] = lhs[1];
      sig.max_sort = std::max(sig.max_sort, so);
      for (const auto& v : words(s.substr(c + 1))) {
        if (sig.lvars.count(v)) fail_at(line, "SyntaxError", "variable declared twice: " + v);
        sig.lvars[v] = so;
        sig.lvar_order.push_back(v);
      }
      continue;
    }
    if (section == "predicates") {
      std::string label, rest;
      if (!split_label(s, label, rest)) fail_at(line, "SyntaxError", "expected '<name>: <arity>'");
      Predicate p;
      p.name = label;
      p.arity = parse_sort(rest, line);
      if (p.name == "eq" || p.name == "holds" || p.name == "bot" || nu_index(intern(p.name)) >= 0)
        fail_at(line, "SyntaxError", "reserved predicate name " + p.name);
      sig.add_predicate(p);
      continue;
    }
    if (section == "connectives") {
      std::string label, rest;
      if (!split_label(s, label, rest)) fail_at(line, "SyntaxError", "expected '<name>: sorts -> sort'");
      std::size_t arrow = rest.find("->");
      if (arrow == std::string::npos) fail_at(line, "SyntaxError", "expected '->' in connective signature");
      Connective cn;
      cn.name = label;
      for (const auto& w : words(rest.substr(0, arrow))) cn.arg_sorts.push_back(parse_sort(w, line));
      auto res = words(rest.substr(arrow + 2));
      if (res.size() != 1) fail_at(line, "SyntaxError", "expected one result sort");
      cn.result_sort = parse_sort(res[0], line);
      try {
        sig.add_connective(cn);
      } catch (const Error&) {
        fail_at(line, "DuplicateConnective", cn.name);
      }
      continue;
    }
    Pending p{line, "", s, section};
    std::string label, rest;
    if (split_label(s, label, rest)) {
      p.label = label;
      p.text = rest;
    }
    if (section == "axiom" && p.label.empty()) fail_at(line, "SyntaxError", "axioms need a name");
    sentences.push_back(p);
  }
  if (!sig.sort_names.count(0)) sig.sort_names[0] = "individual";
  if (!sig.sort_names.count(1)) fail_at(line, "SyntaxError", "sort 1 must be declared");
  for (const auto& [so, _] : sig.sort_names) sig.max_sort = std::max(sig.max_sort, so);
  sig.validate();

  ParseContext ctx;
  ctx.sig = &sig;
  ctx.mode = ParseMode::Schematic;
  std::set<std::string> defined;
  for (const auto& p : sentences) {
    F f;
    try {
      f = parse_formula(p.text, ctx);
    } catch (const Error& e) {
      std::string msg = e.what();
      throw Error(e.code(), "line " + std::to_string(p.line) + ": " + msg);
    }
    if (has_lsort_quantifier(f)) fail_at(p.line, "NotLOpen", "quantifier over an object-language sort");
    if (!is_l_open_sentence(f)) fail_at(p.line, "NotLOpen", show(f));
    if (p.section == "define") {
      Definition d;
      F cur = f;
      while (cur->kind == FKind::Forall) {
        for (Id v : cur->vars) d.qvars.push_back(v);
        cur = cur->kids[0];
      }
      if (cur->kind != FKind::Iff || cur->kids[0]->kind != FKind::Atom)
        fail_at(p.line, "SyntaxError", "definitions have the form 'forall xs. nu_n(E, xs) <-> body'");
      d.head = cur->kids[0]->atom;
      d.body = cur->kids[1];
      check_definition(sig, d, p.line);
      d.name = p.label.empty() ? d.connective : p.label;
      if (!defined.insert(d.connective).second) fail_at(p.line, "DuplicateDefinition", d.connective);
      spec.s0.push_back(d);
    } else if (p.section == "axiom") {
      spec.sb.push_back({p.label, f});
    } else {
      Implication imp = split_implication(f);
      const F& h = p.section == "positive" ? imp.antecedent : imp.consequent;
      if (h->kind != FKind::Atom || nu_index(node(h->atom).sym) < 1)
        fail_at(p.line, "SyntaxError", "half-definitions need a nu_n head");
      Id e = node(h->atom).args[0];
      std::string nm = p.label;
      if (nm.empty()) nm = node(e).kind == Kind::LApp ? name_of(node(e).sym) : "head";
      if (node(e).kind == Kind::LApp) defined.insert(name_of(node(e).sym));
      (p.section == "positive" ? spec.s_plus : spec.s_minus).push_back({nm, f});
    }
  }
  for (const auto& c : sig.connectives)
    if (!defined.count(c.name))
      throw Error("UndefinedConnective", "connective " + c.name + " has no definition");
  return spec;
}

std::string print_spec(const SemanticSpec& spec) {
  const Signature& sig = spec.sig;
  std::ostringstream os;
  os << "sorts\n";
  for (const auto& [so, nm] : sig.sort_names) {
    os << "  " << so << " " << nm << ":";
    for (const auto& v : sig.lvar_order)
      if (sig.lvars.at(v) == so) os << " " << v;
    os << "\n";
  }
  std::map<int, std::vector<std::string>> consts;
  for (const auto& [c, so] : sig.lconsts) consts[so].push_back(c);
  for (const auto& [so, cs] : consts) {
    os << "  consts " << so << ":";
    for (const auto& c : cs) os << " " << c;
    os << "\n";
  }
  os << "  domain:";
  for (const auto& v : sig.domain_vars) os << " " << v;
  os << "\n";
  if (!sig.predicates.empty()) {
    os << "predicates\n";
    for (const auto& p : sig.predicates) os << "  " << p.name << ": " << p.arity << "\n";
  }
  os << "connectives\n";
  for (const auto& c : sig.connectives) {
    os << "  " << c.name << ":";
    for (int s : c.arg_sorts) os << " " << s;
    os << " -> " << c.result_sort << "\n";
  }
  if (!spec.s0.empty()) {
    os << "define\n";
    for (const auto& d : spec.s0) {
      os << "  ";
      if (d.name != d.connective) os << d.name << ": ";
      os << "forall";
      for (Id v : d.qvars) os << " " << show(v);
      os << ". " << show(d.head) << " <-> " << show(d.body) << "\n";
    }
  }
  if (!spec.s_plus.empty()) {
    os << "positive\n";
    for (const auto& s : spec.s_plus) os << "  " << s.name << ": " << show(s.formula) << "\n";
  }
  if (!spec.s_minus.empty()) {
    os << "negative\n";
    for (const auto& s : spec.s_minus) os << "  " << s.name << ": " << show(s.formula) << "\n";
  }
  if (!spec.sb.empty()) {
    os << "axiom\n";
    for (const auto& s : spec.sb) os << "  " << s.name << ": " << show(s.formula) << "\n";
  }
  return os.str();
}

std::string preset_text(const std::string& name) {
  if (name == "so") return std::string(presets::kSoSpec);
  if (name == "ipc") return std::string(presets::kIpcSpec);
  throw Error("UnknownPreset", name);
}

SemanticSpec preset(const std::string& name) { return parse_spec(preset_text(name)); }

}  // namespace tabsyn
