#include "tabsyn/corpus.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <utility>

namespace tabsyn {

// ---------------------------------------------------------------- file format

std::string CorpusEntry::problem_text() const {
  std::string s;
  for (const auto& r : roots) s += r + "\n";
  return s;
}

std::vector<CorpusEntry> parse_corpus(const std::string& text) {
  std::vector<CorpusEntry> out;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw.substr(0, raw.find('#'));
    if (s.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(s);
    CorpusEntry e;
    if (!(ls >> e.id >> e.expected)) throw Error("SyntaxError", "corpus line " + std::to_string(line));
    if (e.expected != "SAT" && e.expected != "UNSAT")
      throw Error("SyntaxError", "corpus line " + std::to_string(line) + ": bad verdict " + e.expected);
    std::string rest;
    std::getline(ls, rest);
    std::size_t a = 0;
    while (a <= rest.size()) {
      std::size_t b = rest.find(';', a);
      if (b == std::string::npos) b = rest.size();
      std::string r = rest.substr(a, b - a);
      std::size_t x = r.find_first_not_of(" \t\r");
      if (x != std::string::npos) e.roots.push_back(r.substr(x, r.find_last_not_of(" \t\r") - x + 1));
      a = b + 1;
    }
    if (e.roots.empty()) throw Error("SyntaxError", "corpus line " + std::to_string(line) + ": no roots");
    out.push_back(std::move(e));
  }
  return out;
}

std::string print_corpus(const std::vector<CorpusEntry>& entries) {
  std::string s;
  for (const auto& e : entries) {
    s += e.id + " " + e.expected;
    for (std::size_t i = 0; i < e.roots.size(); ++i) s += (i ? " ; " : " ") + e.roots[i];
    s += "\n";
  }
  return s;
}

// ---------------------------------------------------------------- generator

namespace {

class Gen {
 public:
  explicit Gen(const GenOptions& o) : opt_(o), rng_(o.seed) {}

  std::string expr(int depth) {
    std::string e = build(depth);
    parts_.emplace_back(e, depth);
    return e;
  }

  std::string build(int depth) {
    if (depth == 0 || pick(4) == 0) return leaf();
    if (opt_.logic == "ipc") {
      static const char* ops[] = {"and", "or", "impl", "impl"};
      std::string op = ops[pick(4)];
      return op + "(" + expr(depth - 1) + ", " + expr(depth - 1) + ")";
    }
    switch (pick(3)) {
      case 0:
        return "not(" + expr(depth - 1) + ")";
      case 1:
        return "or(" + expr(depth - 1) + ", " + expr(depth - 1) + ")";
      default:
        return "exists(r0, " + expr(depth - 1) + ")";
    }
  }

  std::vector<std::string> problem() {
    if (opt_.logic == "ipc") return {"not(" + expr(opt_.max_depth) + ")"};
    int n = 1 + pick(opt_.max_roots);
    std::vector<std::string> roots;
    parts_.clear();
    for (int i = 0; i < n; ++i) roots.push_back(expr(1 + pick(opt_.max_depth)));
    if (std::uniform_real_distribution<double>(0, 1)(rng_) < opt_.clash) {
      auto [s, d] = parts_[static_cast<std::size_t>(pick(static_cast<int>(parts_.size())))];
      if (d + 2 <= opt_.max_depth && pick(2))
        roots.push_back("not(exists(r0, " + s + "))");
      else if (d + 1 <= opt_.max_depth)
        roots.push_back("not(" + s + ")");
    }
    return roots;
  }

 private:
  int pick(int n) { return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng_)); }

  std::string leaf() {
    if (opt_.logic == "ipc") {
      if (pick(8) == 0) return "bot";
      return "p" + std::to_string(pick(opt_.atoms));
    }
    if (opt_.nominal && pick(5) == 0) return "sing(o0)";
    std::string a = "p" + std::to_string(pick(opt_.atoms));
    return pick(3) == 0 ? "not(" + a + ")" : a;
  }

  const GenOptions& opt_;
  std::mt19937_64 rng_;
  std::vector<std::pair<std::string, int>> parts_;  // subconcept, depth bound
};

}  // namespace

std::vector<std::vector<std::string>> random_problems(const GenOptions& opt, int count) {
  if (opt.logic != "so" && opt.logic != "ipc") throw Error("UnknownPreset", opt.logic);
  if (opt.max_depth < 1 || opt.atoms < 1) throw Error("InvalidBound", "depth and atoms must be positive");
  Gen g(opt);
  std::vector<std::vector<std::string>> out;
  for (int i = 0; i < count; ++i) out.push_back(g.problem());
  return out;
}

// ---------------------------------------------------------------- G4ip

namespace {

enum class Op { Atom, Bot, And, Or, Impl };

Op op_of(Id f) {
  const Node& n = node(f);
  if (n.kind != Kind::LApp) return Op::Atom;
  const std::string& s = name_of(n.sym);
  if (s == "bot") return Op::Bot;
  if (s == "and") return Op::And;
  if (s == "or") return Op::Or;
  if (s == "impl") return Op::Impl;
  throw Error("UndefinedConnective", "not an intuitionistic connective: " + s);
}

Id impl(Id a, Id b) { return mk(Kind::LApp, intern("impl"), 1, {a, b}); }

using Ctx = std::vector<Id>;

bool prove(Ctx g, Id goal);

Ctx without(const Ctx& g, std::size_t i) {
  Ctx r = g;
  r.erase(r.begin() + static_cast<std::ptrdiff_t>(i));
  return r;
}

bool prove(Ctx g, Id goal) {
  // Invertible left rules.
  for (std::size_t i = 0; i < g.size(); ++i) {
    Id f = g[i];
    const Node& n = node(f);
    switch (op_of(f)) {
      case Op::Bot:
        return true;
      case Op::And: {
        Ctx r = without(g, i);
        r.push_back(n.args[0]);
        r.push_back(n.args[1]);
        return prove(r, goal);
      }
      case Op::Or: {
        Ctx r = without(g, i);
        Ctx a = r, b = r;
        a.push_back(n.args[0]);
        b.push_back(n.args[1]);
        return prove(a, goal) && prove(b, goal);
      }
      case Op::Impl: {
        Id c = n.args[0], d = n.args[1];
        switch (op_of(c)) {
          case Op::Atom:
            if (std::find(g.begin(), g.end(), c) != g.end()) {
              Ctx r = without(g, i);
              r.push_back(d);
              return prove(r, goal);
            }
            break;
          case Op::Bot:
            return prove(without(g, i), goal);
          case Op::And: {
            Ctx r = without(g, i);
            r.push_back(impl(node(c).args[0], impl(node(c).args[1], d)));
            return prove(r, goal);
          }
          case Op::Or: {
            Ctx r = without(g, i);
            r.push_back(impl(node(c).args[0], d));
            r.push_back(impl(node(c).args[1], d));
            return prove(r, goal);
          }
          case Op::Impl:
            break;
        }
        break;
      }
      case Op::Atom:
        break;
    }
  }
  // Invertible right rules.
  switch (op_of(goal)) {
    case Op::And:
      return prove(g, node(goal).args[0]) && prove(g, node(goal).args[1]);
    case Op::Impl: {
      Ctx r = g;
      r.push_back(node(goal).args[0]);
      return prove(r, node(goal).args[1]);
    }
    case Op::Atom:
      if (std::find(g.begin(), g.end(), goal) != g.end()) return true;
      break;
    default:
      break;
  }
  // Non-invertible choices.
  if (op_of(goal) == Op::Or && (prove(g, node(goal).args[0]) || prove(g, node(goal).args[1]))) return true;
  for (std::size_t i = 0; i < g.size(); ++i) {
    Id f = g[i];
    if (op_of(f) != Op::Impl || op_of(node(f).args[0]) != Op::Impl) continue;
    Id c = node(node(f).args[0]).args[0], d = node(node(f).args[0]).args[1], b = node(f).args[1];
    Ctx r = without(g, i);
    Ctx left = r;
    left.push_back(impl(d, b));
    if (!prove(left, impl(c, d))) continue;
    Ctx right = r;
    right.push_back(b);
    if (prove(right, goal)) return true;
  }
  return false;
}

}  // namespace

bool ipc_valid(Id formula) { return prove({}, formula); }

}  // namespace tabsyn
