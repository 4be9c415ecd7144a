#include "tabsyn/cli.hpp"

#include <CLI11.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "tabsyn/corpus.hpp"
#include "tabsyn/engine.hpp"
#include "tabsyn/models.hpp"
#include "tabsyn/normalize.hpp"
#include "tabsyn/refine.hpp"
#include "tabsyn/spec.hpp"
#include "tabsyn/synth.hpp"

namespace tabsyn::cli {

namespace fs = std::filesystem;

namespace {

// Raised for inputs that do not parse or sort-check.
struct Malformed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Source {
  std::string preset;
  std::string spec;
  void add(CLI::App* app) {
    auto* p = app->add_option("--preset", preset, "built-in logic (so, ipc)");
    auto* s = app->add_option("--spec", spec, "semantic specification file");
    p->excludes(s);
    s->excludes(p);
  }
  SemanticSpec load() const {
    if (preset.empty() == spec.empty()) throw Error("InvalidBound", "exactly one of --preset and --spec is required");
    return preset.empty() ? parse_spec(read_file(spec)) : tabsyn::preset(preset);
  }
};

struct CalcSource {
  std::string calc;
  std::string script;
  std::string ctx;
  bool unsafe = false;
  bool assume_wf = false;
  bool ub = false;
  int ub_depth = 0;
  void add(CLI::App* app, bool blocking) {
    app->add_option("--calc", calc, "calculus file (default: synthesize from the specification)");
    app->add_option("--refine-script", script, "refinement script, file or embedded resource name");
    app->add_option("--ctx", ctx, "internalization context file used by tr steps");
    app->add_flag("--unsafe-refine", unsafe, "allow refinements outside the admissible patterns");
    app->add_flag("--assume-well-founded", assume_wf, "skip the well-foundedness check");
    if (blocking) {
      app->add_flag("--ub", ub, "attach unrestricted blocking");
      app->add_option("--ub-depth", ub_depth, "term-producing applications before blocking")->check(CLI::NonNegativeNumber);
    }
  }
};

std::string load_resource(const std::string& name) {
  if (fs::exists(name)) return read_file(name);
  if (const std::string* r = preset_resource(name)) return *r;
  throw Error("FileNotFound", name);
}

Calculus build_calculus(const CalcSource& cs, const NormalizedSpec* ns) {
  Calculus c;
  if (!cs.calc.empty()) {
    c = parse_calculus(read_file(cs.calc));
  } else {
    if (!ns) throw Error("InvalidBound", "--calc or a specification is required");
    SynthOptions so;
    so.assume_well_founded = cs.assume_wf;
    c = synthesize(*ns, so);
  }
  if (!cs.script.empty()) {
    RefineOptions ro;
    ro.unsafe = cs.unsafe;
    std::string ctx = cs.ctx;
    ro.load = [ctx](const std::string& name) {
      if (!ctx.empty() && name.size() > 4 && name.ends_with(".ctx")) return read_file(ctx);
      return load_resource(name);
    };
    c = apply_script(c, parse_script(load_resource(cs.script)), ro);
  }
  if (cs.ub) c = attach_ub(c, UbConfig{true, cs.ub_depth});
  return c;
}

Problem load_problem(const std::string& path, const Signature& sig) {
  std::string text = read_file(path);
  try {
    Problem p = parse_problem(text, sig);
    if (p.roots.empty()) throw Error("EmptyInput", "problem has no concepts");
    return p;
  } catch (const Error& e) {
    throw Malformed(e.what());
  }
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) throw Error("IOError", "cannot write " + path);
}

std::string rule_counts(const Calculus& c) {
  std::map<std::string, int> by;
  for (const auto& r : c.rules) ++by[kind_name(r.kind)];
  std::string s = "rules: " + std::to_string(c.rules.size());
  for (const auto& [k, n] : by) s += "  " + k + "=" + std::to_string(n);
  return s;
}

int exit_for(Verdict v) {
  switch (v) {
    case Verdict::Satisfiable:
      return kSat;
    case Verdict::Unsatisfiable:
      return kUnsat;
    default:
      return kUnknown;
  }
}

int exit_for(OracleVerdict v) {
  switch (v) {
    case OracleVerdict::Sat:
      return kSat;
    case OracleVerdict::Unsat:
      return kUnsat;
    default:
      return kUnknown;
  }
}

// ---------------------------------------------------------------- commands

struct SynthCmd {
  Source src;
  std::string out_path = "-";
  bool assume_wf = false;
  void add(CLI::App& app) {
    auto* c = app.add_subcommand("synth", "synthesize a tableau calculus");
    src.add(c);
    c->add_option("-o,--out", out_path, "output calculus file");
    c->add_flag("--assume-well-founded", assume_wf, "skip the well-foundedness check");
  }
  int run(std::ostream& out, std::ostream& err) const {
    SynthOptions so;
    so.assume_well_founded = assume_wf;
    Calculus c = synthesize(normalize(src.load()), so);
    write_text(out_path, print_calculus(c), out);
    (out_path == "-" ? err : out) << rule_counts(c) << "\n";
    return 0;
  }
};

struct RefineCmd {
  Source src;
  CalcSource cs;
  std::string out_path = "-";
  void add(CLI::App& app) {
    auto* c = app.add_subcommand("refine", "apply a refinement script to a calculus");
    src.add(c);
    cs.add(c, true);
    c->add_option("-o,--out", out_path, "output calculus file");
  }
  int run(std::ostream& out, std::ostream& err) const {
    if (cs.script.empty()) throw Error("InvalidBound", "--refine-script is required");
    std::unique_ptr<NormalizedSpec> ns;
    if (cs.calc.empty()) ns = std::make_unique<NormalizedSpec>(normalize(src.load()));
    Calculus c = build_calculus(cs, ns.get());
    write_text(out_path, print_calculus(c), out);
    (out_path == "-" ? err : out) << rule_counts(c) << "\n";
    return 0;
  }
};

struct ProveCmd {
  Source src;
  CalcSource cs;
  std::string problem;
  std::string search = "dfs";
  std::int64_t budget_nodes = 1'000'000;
  double budget_secs = 0;
  std::string model_path;
  std::string trace_path;
  bool check_subexpr = false;
  void add(CLI::App& app) {
    auto* c = app.add_subcommand("prove", "decide satisfiability of a problem");
    src.add(c);
    cs.add(c, true);
    c->add_option("problem", problem, "problem file, one concept per line")->required();
    c->add_option("--search", search, "branch selection")->check(CLI::IsMember({"dfs", "bfs"}));
    c->add_option("--budget-nodes", budget_nodes, "rule application budget")->check(CLI::PositiveNumber);
    c->add_option("--budget-secs", budget_secs, "time budget in seconds")->check(CLI::PositiveNumber);
    c->add_option("--model", model_path, "write the extracted model ('-' for stdout)");
    c->add_option("--trace", trace_path, "write the rule application trace");
    c->add_flag("--check-subexpr", check_subexpr, "assert that derived expressions stay within the input closure");
  }
  int run(std::ostream& out, std::ostream& err) const {
    NormalizedSpec ns = normalize(src.load());
    Calculus c = build_calculus(cs, &ns);
    Problem p = load_problem(problem, c.sig);
    EngineOptions eo;
    eo.search = search == "bfs" ? Search::BreadthFirst : Search::DepthFirst;
    eo.max_applications = budget_nodes;
    eo.max_seconds = budget_secs;
    eo.trace = !trace_path.empty();
    std::set<Id> subs;
    if (check_subexpr) {
      std::vector<Id> roots;
      for (const auto& r : p.roots) roots.push_back(r.expr);
      subs = sub_closure(ns, roots);
      eo.subexpressions = &subs;
    }
    ProofResult r = tabsyn::prove(c, p, eo);
    out << verdict_name(r.verdict) << "\n";
    out << "applications: " << r.stats.applications << "  branches: " << r.stats.branches
        << "  blocked: " << r.stats.blocked_instances << "\n";
    if (!r.reason.empty()) out << "reason: " << r.reason << "\n";
    if (check_subexpr) {
      out << "subexpression violations: " << r.subexpression_violations.size() << "\n";
      for (const auto& v : r.subexpression_violations) err << "  " << v << "\n";
    }
    if (!r.blocking_violations.empty()) {
      out << "blocking violations: " << r.blocking_violations.size() << "\n";
      for (const auto& v : r.blocking_violations) err << "  " << v << "\n";
    }
    if (!trace_path.empty()) {
      std::string t;
      for (const auto& l : r.trace) t += l + "\n";
      write_text(trace_path, t, out);
    }
    if (r.verdict == Verdict::Satisfiable && !model_path.empty()) {
      LStructure m = extract_model(*r.branch, c, ns);
      ModelCheck mc = check_model(ns, c, m, *r.branch, p, r.root_constant);
      write_text(model_path, print_model(m), out);
      out << "reflection: " << mc.reflection.checked << " literals, " << mc.reflection.violations.size()
          << " violations\n";
      out << "inputs hold: " << (mc.inputs_hold ? "yes" : "no") << "\n";
      out << "background: " << mc.background_checked << " instances, " << mc.background_violations.size()
          << " violations\n";
      for (const auto& v : mc.reflection.violations) err << "  " << v << "\n";
      for (const auto& v : mc.background_violations) err << "  " << v << "\n";
    }
    return exit_for(r.verdict);
  }
};

struct OracleCmd {
  Source src;
  std::string problem;
  int max_size = 0;
  int max_bits = 40;
  bool serial = false;
  bool inconclusive = false;
  std::string model_path;
  void add(CLI::App& app) {
    auto* c = app.add_subcommand("oracle", "bounded finite-model search");
    src.add(c);
    c->add_option("problem", problem, "problem file, one concept per line")->required();
    c->add_option("--max-size", max_size, "largest domain (default 3, ipc 4)")->check(CLI::PositiveNumber);
    c->add_option("--max-bits", max_bits, "cap on enumerated assignment bits")->check(CLI::PositiveNumber);
    c->add_flag("--serial", serial, "disable parallel enumeration");
    c->add_flag("--inconclusive-bound", inconclusive, "report UNKNOWN instead of UNSAT when the bound is exhausted");
    c->add_option("--model", model_path, "write the model found ('-' for stdout)");
  }
  int run(std::ostream& out, std::ostream&) const {
    NormalizedSpec ns = normalize(src.load());
    Problem p = load_problem(problem, ns.sig);
    OracleOptions oo;
    oo.max_size = max_size > 0 ? max_size : (src.preset == "ipc" ? 4 : 3);
    oo.max_bits = max_bits;
    oo.parallel = !serial;
    oo.bound_conclusive = !inconclusive;
    OracleResult r;
    try {
      r = brute_force_sat(ns, p, oo);
    } catch (const Error& e) {
      if (e.code() != "CarrierTooLarge") throw;
      r.verdict = OracleVerdict::Unknown;
      r.reason = e.what();
    }
    out << oracle_verdict_name(r.verdict) << "\n";
    out << "structures: " << r.structures << "\n";
    if (!r.reason.empty()) out << "reason: " << r.reason << "\n";
    if (r.verdict == OracleVerdict::Sat && !model_path.empty()) write_text(model_path, print_model(r.model), out);
    return exit_for(r.verdict);
  }
};

struct CheckWdCmd {
  Source src;
  std::string outdir = "wd";
  std::string prover;
  void add(CLI::App& app) {
    auto* c = app.add_subcommand("check-wd", "export well-definedness obligations as TPTP");
    src.add(c);
    c->add_option("--outdir", outdir, "output directory");
    c->add_option("--prover", prover, "prover command; the problem path is appended");
  }
  static std::string run_prover(const std::string& cmd) {
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen((cmd + " 2>&1").c_str(), "r"), pclose);
    if (!pipe) return {};
    std::string s;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe.get())) s += buf.data();
    return s;
  }
  int run(std::ostream& out, std::ostream& err) const {
    auto obs = emit_wd_obligations(normalize(src.load()));
    std::error_code ec;
    fs::create_directories(outdir, ec);
    if (ec || !fs::is_directory(outdir)) throw Error("IOError", "cannot create " + outdir);
    bool valid = true;
    for (const auto& o : obs) {
      fs::path path = fs::path(outdir) / o.filename;
      write_text(path.string(), o.tptp, out);
      auto errs = check_tptp(o.tptp);
      out << o.filename << ": " << (errs.empty() ? "valid TPTP" : "INVALID TPTP")
          << (o.predischarged ? " (discharged by construction)" : "") << "\n";
      for (const auto& e : errs) err << "  " << e << "\n";
      valid = valid && errs.empty();
      if (!prover.empty()) {
        std::string res = run_prover(prover + " " + path.string());
        bool proved = res.find("SZS status Theorem") != std::string::npos ||
                      res.find("SZS status Unsatisfiable") != std::string::npos;
        out << "  prover: " << (proved ? "proved" : "not proved") << "\n";
      }
    }
    return valid ? 0 : kPipelineError;
  }
};

struct GenCorpusCmd {
  std::string logic = "so";
  int count = 200;
  std::uint64_t seed = 1;
  int depth = 4;
  int atoms = 0;
  std::string out_path = "-";
  void add(CLI::App& app) {
    auto* c = app.add_subcommand("gen-corpus", "generate an oracle-labelled random corpus");
    c->add_option("--logic", logic, "so or ipc")->check(CLI::IsMember({"so", "ipc"}));
    c->add_option("--count", count, "number of instances")->check(CLI::PositiveNumber);
    c->add_option("--seed", seed, "generator seed");
    c->add_option("--depth", depth, "maximal concept depth")->check(CLI::PositiveNumber);
    c->add_option("--atoms", atoms, "number of atoms (default 2, ipc 3)")->check(CLI::PositiveNumber);
    c->add_option("-o,--out", out_path, "output corpus file");
  }
  int run(std::ostream& out, std::ostream& err) const {
    NormalizedSpec ns = normalize(preset(logic));
    GenOptions g;
    g.logic = logic;
    g.seed = seed;
    g.max_depth = depth;
    g.atoms = atoms > 0 ? atoms : (logic == "ipc" ? 3 : 2);
    std::vector<CorpusEntry> entries;
    if (logic == "ipc") {
      entries.push_back({"ipc-identity", "UNSAT", {"not(impl(p0, p0))"}});
      entries.push_back({"ipc-peirce", "SAT", {"not(impl(impl(impl(p0, p1), p0), p0))"}});
      entries.push_back({"ipc-linearity", "SAT", {"not(or(impl(p0, p1), impl(p1, p0)))"}});
    }
    std::set<std::string> seen;
    for (const auto& e : entries) seen.insert(e.problem_text());
    int skipped = 0;
    std::size_t target = static_cast<std::size_t>(count);
    for (int batch = 0; entries.size() < target; ++batch) {
      g.seed = seed + static_cast<std::uint64_t>(batch) * 1'000'003ULL;
      for (auto& roots : random_problems(g, count)) {
        if (entries.size() >= target) break;
        CorpusEntry e{"", "", roots};
        if (!seen.insert(e.problem_text()).second) continue;
        Problem p = parse_problem(e.problem_text(), ns.sig);
        OracleOptions oo;
        oo.max_size = logic == "ipc" ? 4 : 3;
        OracleResult r = brute_force_sat(ns, p, oo);
        if (logic == "ipc") {
          bool valid = ipc_valid(p.roots[0].expr);
          if (valid != (r.verdict == OracleVerdict::Unsat)) {
            err << "oracle and sequent search disagree: " << roots[0] << "\n";
            return kPipelineError;
          }
        } else if (r.verdict == OracleVerdict::Unsat) {
          oo.max_size = 4;
          OracleResult wide;
          try {
            wide = brute_force_sat(ns, p, oo);
          } catch (const Error&) {
            ++skipped;
            continue;
          }
          if (wide.verdict != OracleVerdict::Unsat) {
            ++skipped;
            continue;
          }
        }
        e.expected = r.verdict == OracleVerdict::Sat ? "SAT" : "UNSAT";
        e.id = logic + "-" + std::to_string(entries.size() + 1);
        entries.push_back(std::move(e));
      }
    }
    write_text(out_path, print_corpus(entries), out);
    int unsat = 0;
    for (const auto& e : entries) unsat += e.expected == "UNSAT";
    (out_path == "-" ? err : out) << entries.size() << " instances, " << unsat << " UNSAT, " << skipped
                                  << " skipped as inconclusive\n";
    return 0;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"tabsyn: tableau calculus synthesis and proving"};
  app.require_subcommand(1);
  SynthCmd synth;
  RefineCmd refine;
  ProveCmd prove;
  OracleCmd oracle;
  CheckWdCmd checkwd;
  GenCorpusCmd gen;
  synth.add(app);
  refine.add(app);
  prove.add(app);
  oracle.add(app);
  checkwd.add(app);
  gen.add(app);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kMalformed;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    if (name == "synth") return synth.run(out, err);
    if (name == "refine") return refine.run(out, err);
    if (name == "prove") return prove.run(out, err);
    if (name == "oracle") return oracle.run(out, err);
    if (name == "check-wd") return checkwd.run(out, err);
    return gen.run(out, err);
  } catch (const Malformed& e) {
    err << "error: " << e.what() << "\n";
    return kMalformed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kPipelineError;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace tabsyn::cli
