#include "tabsyn/synth.hpp"

#include <algorithm>

namespace tabsyn {

F nnf(const F& f, bool neg) {
  switch (f->kind) {
    case FKind::Atom:
      return neg ? f_not(f) : f;
    case FKind::Bot:
      return neg ? f_top() : f_bot();
    case FKind::Top:
      return neg ? f_bot() : f_top();
    case FKind::Not:
      return nnf(f->kids[0], !neg);
    case FKind::And:
    case FKind::Or: {
      std::vector<F> ks;
      for (const auto& k : f->kids) ks.push_back(nnf(k, neg));
      bool conj = (f->kind == FKind::And) != neg;
      return conj ? f_and(ks) : f_or(ks);
    }
    case FKind::Implies: {
      const F& a = f->kids[0];
      const F& b = f->kids[1];
      if (!neg) return f_or({nnf(a, true), nnf(b, false)});
      return f_and({nnf(a, false), nnf(b, true)});
    }
    case FKind::Iff: {
      const F& a = f->kids[0];
      const F& b = f->kids[1];
      if (!neg)
        return f_and({f_or({nnf(a, true), nnf(b, false)}), f_or({nnf(a, false), nnf(b, true)})});
      return f_or({f_and({nnf(a, false), nnf(b, true)}), f_and({nnf(a, true), nnf(b, false)})});
    }
    case FKind::Forall:
    case FKind::Exists: {
      bool univ = (f->kind == FKind::Forall) != neg;
      F body = nnf(f->kids[0], neg);
      return univ ? f_forall(f->vars, body) : f_exists(f->vars, body);
    }
  }
  return f;
}

std::vector<std::vector<Id>> dnf(const F& f, std::size_t cap) {
  std::vector<std::vector<Id>> out;
  auto size = [](const std::vector<std::vector<Id>>& m) {
    std::size_t n = 0;
    for (const auto& c : m) n += c.size();
    return n;
  };
  switch (f->kind) {
    case FKind::Atom:
      return {{f->atom}};
    case FKind::Not:
      if (f->kids[0]->kind != FKind::Atom) throw Error("NonFirstOrderShape", "formula not in NNF");
      return {{negate(f->kids[0]->atom)}};
    case FKind::Bot:
      return {};
    case FKind::Top:
      return {{}};
    case FKind::Or:
      for (const auto& k : f->kids) {
        auto d = dnf(k, cap);
        out.insert(out.end(), d.begin(), d.end());
        if (size(out) > cap) throw Error("DnfTooLarge", "more than " + std::to_string(cap) + " literals");
      }
      return out;
    case FKind::And: {
      out = {{}};
      for (const auto& k : f->kids) {
        auto d = dnf(k, cap);
        std::vector<std::vector<Id>> next;
        for (const auto& a : out)
          for (const auto& b : d) {
            auto c = a;
            c.insert(c.end(), b.begin(), b.end());
            next.push_back(std::move(c));
          }
        out = std::move(next);
        if (size(out) > cap) throw Error("DnfTooLarge", "more than " + std::to_string(cap) + " literals");
      }
      return out;
    }
    default:
      throw Error("NonFirstOrderShape", "quantifier or connective left in matrix: " + show(f));
  }
}

std::vector<std::vector<Id>> clean_matrix(std::vector<std::vector<Id>> m) {
  std::vector<std::vector<Id>> out;
  std::vector<std::set<Id>> seen;
  for (auto& conj : m) {
    std::vector<Id> c;
    std::set<Id> s;
    bool contradictory = false;
    for (Id l : conj) {
      if (is_top(l)) continue;
      if (is_bot(l)) contradictory = true;
      if (s.insert(l).second) c.push_back(l);
    }
    for (Id l : c)
      if (s.count(negate(l))) contradictory = true;
    if (contradictory) continue;
    if (c.empty()) {
      c.push_back(top_lit());
      s.insert(top_lit());
    }
    if (std::find(seen.begin(), seen.end(), s) != seen.end()) continue;
    seen.push_back(s);
    out.push_back(std::move(c));
  }
  return out;
}

std::string SkolemNamer::next(const std::string& origin) {
  return "sk_" + origin + "_" + std::to_string(++counters_[origin]);
}

namespace {

struct Skolemizer {
  Signature& sig;
  SkolemNamer& names;
  std::string origin;
  std::vector<Id> prefix;
  std::set<std::string> used;
  std::vector<Id> universals_all;
  std::vector<FunctionSym> created;

  std::string fresh(const std::string& base) {
    if (!used.count(base)) {
      used.insert(base);
      return base;
    }
    for (int i = 1;; ++i) {
      std::string c = base + std::to_string(i);
      if (!used.count(c)) {
        used.insert(c);
        return c;
      }
    }
  }

  F run(const F& f, std::vector<Id> universals, Binding ren) {
    switch (f->kind) {
      case FKind::Atom:
        return f_atom(substitute(f->atom, ren));
      case FKind::Not:
        return f_not(run(f->kids[0], universals, ren));
      case FKind::Bot:
      case FKind::Top:
        return f;
      case FKind::And:
      case FKind::Or: {
        std::vector<F> ks;
        for (const auto& k : f->kids) ks.push_back(run(k, universals, ren));
        return f->kind == FKind::And ? f_and(ks) : f_or(ks);
      }
      case FKind::Forall: {
        for (Id v : f->vars) {
          Id nv = dvar(fresh(name_of(node(v).sym)));
          ren[v] = nv;
          universals.push_back(nv);
          universals_all.push_back(nv);
        }
        return run(f->kids[0], universals, ren);
      }
      case FKind::Exists: {
        for (Id v : f->vars) {
          FunctionSym fs;
          fs.name = names.next(origin);
          fs.skolem = true;
          std::vector<Id> args;
          for (Id p : prefix) {
            fs.arg_sorts.push_back(node(p).kind == Kind::LVar ? node(p).sort : kDomainSort);
            args.push_back(p);
          }
          for (Id u : universals) {
            fs.arg_sorts.push_back(kDomainSort);
            args.push_back(u);
          }
          sig.add_function(fs);
          created.push_back(fs);
          ren[v] = dfun(fs.name, args);
        }
        return run(f->kids[0], universals, ren);
      }
      default:
        throw Error("NonFirstOrderShape", "unexpected connective after NNF");
    }
  }
};

std::vector<Id> ordered_lvars(Id n) {
  std::vector<Id> vs, out;
  ordered_vars(n, vs);
  for (Id v : vs)
    if (node(v).kind == Kind::LVar) out.push_back(v);
  return out;
}

std::vector<Id> ordered_lvars(const F& f) {
  std::vector<Id> atoms, out;
  collect_atoms(f, atoms);
  for (Id a : atoms)
    for (Id v : ordered_lvars(a))
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  return out;
}

std::vector<Id> matrix_dvars(const std::vector<std::vector<Id>>& m) {
  std::vector<Id> vs, out;
  for (const auto& c : m)
    for (Id l : c) ordered_vars(l, vs);
  for (Id v : vs)
    if (node(v).kind == Kind::DVar) out.push_back(v);
  return out;
}

Id dp(Id v) { return mk_lit(true, sym_eq(), {v, v}); }

}  // namespace

ImplicationalForm implicational_form(const Xi& xi, Signature& sig, SkolemNamer& names,
                                     std::size_t cap) {
  ImplicationalForm out;
  out.head = xi.positive ? xi.head : negate(xi.head);
  F body = xi.positive ? xi.body : f_not(xi.body);
  if (has_lsort_quantifier(body)) throw Error("NonFirstOrderShape", "quantifier over an L-sort");
  Skolemizer sk{sig, names, xi.connective.empty() ? xi.name : xi.connective, {}, {}, {}, {}};
  sk.prefix = ordered_lvars(xi.head_expr());
  const Node& h = node(xi.head);
  for (std::size_t i = 1; i < h.args.size(); ++i) {
    sk.prefix.push_back(h.args[i]);
    sk.used.insert(name_of(node(h.args[i]).sym));
  }
  F m = sk.run(nnf(body), {}, {});
  out.matrix = clean_matrix(dnf(m, cap));
  out.skolems = sk.created;
  return out;
}

Rule make_decomposition_rule(const Xi& xi, Signature& sig, SkolemNamer& names, std::size_t cap) {
  ImplicationalForm form = implicational_form(xi, sig, names, cap);
  Rule r;
  std::string base = xi.connective.empty() ? xi.name : xi.connective;
  r.id = base + (xi.positive ? "_pos" : "_neg");
  r.kind = xi.positive ? RuleKind::DecompPos : RuleKind::DecompNeg;
  r.origin = std::string(xi.positive ? "positive" : "negative") + " half of " + xi.name;
  r.premises.push_back(form.head);
  std::set<Id> head_vars;
  collect_dvars(xi.head, head_vars);
  for (Id v : matrix_dvars(form.matrix))
    if (!head_vars.count(v)) r.premises.push_back(dp(v));
  r.denominators = form.matrix;
  for (const auto& f : form.skolems) r.fresh_functions.push_back(f.name);
  r.produces_terms = !r.fresh_functions.empty();
  return r;
}

Rule make_theory_rule(const Sentence& s, Signature& sig, SkolemNamer& names, std::size_t cap) {
  std::vector<Id> atoms;
  collect_atoms(s.formula, atoms);
  for (Id a : atoms) {
    std::set<Id> es;
    collect_all_lexprs(a, es);
    for (Id e : es)
      if (node(e).kind == Kind::LApp) throw Error("NonAtomicBackground", s.name + ": " + show(e));
  }
  Skolemizer sk{sig, names, s.name, {}, {}, {}, {}};
  sk.prefix = ordered_lvars(s.formula);
  F m = sk.run(nnf(s.formula), {}, {});
  Rule r;
  r.id = s.name;
  r.kind = RuleKind::Theory;
  r.origin = "background sentence " + s.name;
  r.denominators = clean_matrix(dnf(m, cap));
  std::vector<Id> vs;
  for (const auto& c : r.denominators)
    for (Id l : c) ordered_vars(l, vs);
  for (Id v : sk.prefix)
    if (std::find(vs.begin(), vs.end(), v) != vs.end()) r.premises.push_back(dp(v));
  std::vector<Id> dv = sk.universals_all;
  for (Id v : matrix_dvars(r.denominators))
    if (std::find(dv.begin(), dv.end(), v) == dv.end()) dv.push_back(v);
  for (Id v : dv)
    if (std::find(vs.begin(), vs.end(), v) != vs.end()) r.premises.push_back(dp(v));
  for (const auto& f : sk.created) r.fresh_functions.push_back(f.name);
  r.produces_terms = !r.fresh_functions.empty();
  return r;
}

namespace {

std::string dom_name(const Signature& sig, std::size_t i) {
  if (i < sig.domain_vars.size()) return sig.domain_vars[i];
  return "x" + std::to_string(i);
}

std::vector<Id> dom_vars(const Signature& sig, std::size_t n) {
  std::vector<Id> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(dvar(dom_name(sig, i)));
  return out;
}

Id lvar_of_sort(const Signature& sig, int sort, int k) {
  int seen = 0;
  for (const auto& v : sig.lvar_order)
    if (sig.lvars.at(v) == sort && seen++ == k) return lvar(v, sort);
  return lvar("e" + std::to_string(sort) + "_" + std::to_string(k), sort);
}

Rule eq_rule(const std::string& id, std::vector<Id> prem, std::vector<std::vector<Id>> dens) {
  Rule r;
  r.id = id;
  r.kind = RuleKind::Equality;
  r.origin = "default equality";
  r.premises = std::move(prem);
  r.denominators = std::move(dens);
  return r;
}

}  // namespace

std::vector<Rule> default_equality_rules(const Signature& sig) {
  std::vector<Rule> out;
  auto xs = dom_vars(sig, 3);
  Id x = xs[0], y = xs[1], z = xs[2];
  Sym eq = sym_eq();
  out.push_back(eq_rule("eq_pred_pos", {mk_lit(true, eq, {x, y})}, {{dp(x), dp(y)}}));
  out.push_back(eq_rule("eq_pred_neg", {mk_lit(false, eq, {x, y})}, {{dp(x), dp(y)}}));
  std::vector<int> nus = sig.used_nu_sorts();
  for (int n : nus) {
    Id p = lvar_of_sort(sig, n, 0);
    auto v = dom_vars(sig, static_cast<std::size_t>(n));
    std::vector<Id> args{p};
    args.insert(args.end(), v.begin(), v.end());
    std::vector<Id> den{dp(p)};
    for (Id a : v) den.push_back(dp(a));
    std::string nm = name_of(sym_nu(n));
    out.push_back(eq_rule(nm + "_pred_pos", {mk_lit(true, sym_nu(n), args)}, {den}));
    out.push_back(eq_rule(nm + "_pred_neg", {mk_lit(false, sym_nu(n), args)}, {den}));
  }
  for (const auto& pr : sig.predicates) {
    auto v = dom_vars(sig, static_cast<std::size_t>(pr.arity));
    std::vector<Id> den;
    for (Id a : v) den.push_back(dp(a));
    out.push_back(eq_rule(pr.name + "_pred_pos", {mk_lit(true, intern(pr.name), v)}, {den}));
    out.push_back(eq_rule(pr.name + "_pred_neg", {mk_lit(false, intern(pr.name), v)}, {den}));
  }
  out.push_back(eq_rule("eq_sym", {mk_lit(true, eq, {x, y})}, {{mk_lit(true, eq, {y, x})}}));
  out.push_back(eq_rule("eq_trans", {mk_lit(true, eq, {x, y}), mk_lit(true, eq, {y, z})},
                        {{mk_lit(true, eq, {x, z})}}));
  for (int n : nus) {
    Id p = lvar_of_sort(sig, n, 0);
    auto v = dom_vars(sig, static_cast<std::size_t>(n) + 1);
    Id fresh = v.back();
    v.pop_back();
    std::string nm = name_of(sym_nu(n));
    for (int i = 0; i < n; ++i) {
      std::vector<Id> a{p}, b{p};
      a.insert(a.end(), v.begin(), v.end());
      b.insert(b.end(), v.begin(), v.end());
      b[static_cast<std::size_t>(i) + 1] = fresh;
      out.push_back(eq_rule(nm + "_cong_" + std::to_string(i + 1),
                            {mk_lit(true, sym_nu(n), a), mk_lit(true, eq, {v[static_cast<std::size_t>(i)], fresh})},
                            {{mk_lit(true, sym_nu(n), b)}}));
    }
  }
  for (const auto& pr : sig.predicates) {
    auto v = dom_vars(sig, static_cast<std::size_t>(pr.arity) + 1);
    Id fresh = v.back();
    v.pop_back();
    for (int i = 0; i < pr.arity; ++i) {
      auto b = v;
      b[static_cast<std::size_t>(i)] = fresh;
      out.push_back(eq_rule(pr.name + "_cong_" + std::to_string(i + 1),
                            {mk_lit(true, intern(pr.name), v), mk_lit(true, eq, {v[static_cast<std::size_t>(i)], fresh})},
                            {{mk_lit(true, intern(pr.name), b)}}));
    }
  }
  for (const auto& f : sig.functions) {
    std::map<int, int> per_sort;
    std::vector<Id> args;
    std::vector<std::size_t> dom_pos;
    std::size_t nd = 0;
    for (int s : f.arg_sorts) {
      if (s == kDomainSort) {
        dom_pos.push_back(args.size());
        args.push_back(dvar(dom_name(sig, nd++)));
      } else {
        args.push_back(lvar_of_sort(sig, s, per_sort[s]++));
      }
    }
    Id fresh = dvar(dom_name(sig, nd));
    Id t = dfun(f.name, args);
    for (std::size_t k = 0; k < dom_pos.size(); ++k) {
      auto b = args;
      b[dom_pos[k]] = fresh;
      out.push_back(eq_rule(f.name + "_cong_" + std::to_string(k + 1),
                            {mk_lit(true, eq, {t, t}), mk_lit(true, eq, {args[dom_pos[k]], fresh})},
                            {{mk_lit(true, eq, {t, dfun(f.name, b)})}}));
    }
  }
  return out;
}

std::vector<Rule> closure_rules(const Signature& sig, const std::vector<Rule>& logical) {
  std::set<Sym> negative;
  for (const auto& r : logical)
    for (const auto& d : r.denominators)
      for (Id l : d)
        if (!positive(l)) negative.insert(node(l).sym);
  std::vector<Rule> out;
  auto clash = [&](const std::string& id, Sym pred, std::vector<Id> args) {
    Rule r;
    r.id = id;
    r.kind = RuleKind::Closure;
    r.origin = "closure";
    r.premises = {mk_lit(true, pred, args), mk_lit(false, pred, args)};
    out.push_back(r);
  };
  for (int n : sig.used_nu_sorts()) {
    std::vector<Id> args{lvar_of_sort(sig, n, 0)};
    auto v = dom_vars(sig, static_cast<std::size_t>(n));
    args.insert(args.end(), v.begin(), v.end());
    clash(name_of(sym_nu(n)) + "_clash", sym_nu(n), args);
  }
  if (negative.count(sym_eq())) clash("eq_clash", sym_eq(), dom_vars(sig, 2));
  for (const auto& pr : sig.predicates)
    if (negative.count(intern(pr.name)))
      clash(pr.name + "_clash", intern(pr.name), dom_vars(sig, static_cast<std::size_t>(pr.arity)));
  return out;
}

Calculus synthesize(const NormalizedSpec& ns, const SynthOptions& opt) {
  WfResult wf = check_well_founded(induced_ordering(ns));
  if (wf.verdict != WfVerdict::ProvedWF && !opt.assume_well_founded)
    throw Error("NotWellFounded", wf.witness.empty() ? "well-foundedness not established; use "
                                                       "--assume-well-founded to override"
                                                     : wf.witness);
  Calculus c;
  c.sig = ns.sig;
  set_default_views(c);
  SkolemNamer names;
  struct Pair {
    std::string key;
    const Xi* plus = nullptr;
    const Xi* minus = nullptr;
  };
  std::vector<Pair> pairs;
  auto slot = [&](const Xi& x) -> Pair& {
    std::string key = x.connective.empty() ? x.name : x.connective;
    for (auto& p : pairs)
      if (p.key == key) return p;
    pairs.push_back({key});
    return pairs.back();
  };
  for (const auto& x : ns.s_plus) slot(x).plus = &x;
  for (const auto& x : ns.s_minus) slot(x).minus = &x;
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.key < b.key; });
  std::vector<Rule> logical;
  for (const auto& p : pairs) {
    if (p.plus) logical.push_back(make_decomposition_rule(*p.plus, c.sig, names, opt.dnf_cap));
    if (p.minus) logical.push_back(make_decomposition_rule(*p.minus, c.sig, names, opt.dnf_cap));
  }
  for (const auto& s : ns.sb) logical.push_back(make_theory_rule(s, c.sig, names, opt.dnf_cap));
  c.rules = logical;
  if (ns.default_equality)
    for (auto& r : default_equality_rules(c.sig)) c.rules.push_back(std::move(r));
  for (auto& r : closure_rules(c.sig, logical)) c.rules.push_back(std::move(r));
  for (const auto& f : c.sig.functions)
    if (f.skolem) c.skolems.insert(f.name);
  return c;
}

}  // namespace tabsyn
