#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "support.hpp"
#include "tabsyn/cli.hpp"
#include "tabsyn/corpus.hpp"

using namespace tabsyn;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Scratch {
 public:
  Scratch() {
    dir_ = fs::temp_directory_path() / ("tabsyn_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
    return (dir_ / name).string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

 private:
  fs::path dir_;
  static inline int counter_ = 0;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("synth writes a calculus") {
    Scratch tmp;
    Run r = run({"synth", "--preset", "so", "-o", tmp.path("so.calc")});
    CHECK(r.code == cli::kSat);
    CHECK(r.out.find("rules: 24") != std::string::npos);
    Calculus c = parse_calculus(slurp(tmp.path("so.calc")));
    CHECK(c.rules.size() == 24);
  }

  TEST_CASE("synth is byte deterministic") {
    Scratch tmp;
    REQUIRE(run({"synth", "--preset", "ipc", "-o", tmp.path("a.calc")}).code == 0);
    REQUIRE(run({"synth", "--preset", "ipc", "-o", tmp.path("b.calc")}).code == 0);
    CHECK(slurp(tmp.path("a.calc")) == slurp(tmp.path("b.calc")));
    REQUIRE(run({"synth", "--spec", TABSYN_SOURCE_DIR "/presets/so.spec", "-o", tmp.path("c.calc")}).code == 0);
    REQUIRE(run({"synth", "--preset", "so", "-o", tmp.path("d.calc")}).code == 0);
    CHECK(slurp(tmp.path("c.calc")) == slurp(tmp.path("d.calc")));
  }

  TEST_CASE("broken specification") {
    Scratch tmp;
    std::string spec = tmp.write("broken.spec", "sorts\n  1 concept: p\nconnectives\n  not: 1 ->\n");
    Run r = run({"synth", "--spec", spec});
    CHECK(r.code == cli::kPipelineError);
    CHECK(r.err.find("SyntaxError") != std::string::npos);
    CHECK(run({"synth", "--preset", "k5"}).code == cli::kPipelineError);
  }

  TEST_CASE("refine against the golden calculi") {
    Scratch tmp;
    Run r = run({"refine", "--preset", "ipc", "--refine-script", "ipc.refine", "-o", tmp.path("ipc.calc")});
    REQUIRE(r.code == 0);
    Calculus golden = parse_calculus(slurp(TABSYN_SOURCE_DIR "/golden/ipc-refined.calc"));
    CHECK(canonical_diff(parse_calculus(slurp(tmp.path("ipc.calc"))), golden).empty());
  }

  TEST_CASE("refine with an absent rule") {
    Scratch tmp;
    std::string script = tmp.write("bad.refine", "rf no_such_rule fold=1\n");
    Run r = run({"refine", "--preset", "so", "--refine-script", script, "-o", tmp.path("x.calc")});
    CHECK(r.code == cli::kPipelineError);
    CHECK(r.err.find("NoSuchRule") != std::string::npos);
  }

  TEST_CASE("prove verdicts") {
    Scratch tmp;
    std::string unsat = tmp.write("u.txt", "exists(r0, exists(r0, p0))\nnot(exists(r0, p0))\n");
    CHECK(run({"prove", "--preset", "so", "--refine-script", "so.refine", "--ub", unsat}).code == cli::kUnsat);
    std::string ipc = tmp.write("i.txt", "not(impl(p, p))\n");
    CHECK(run({"prove", "--preset", "ipc", "--refine-script", "ipc.refine", "--ub", ipc}).code == cli::kUnsat);
    std::string sat = tmp.write("s.txt", "exists(r0, p0)\n");
    Run r = run({"prove", "--preset", "so", "--refine-script", "so.refine", sat, "--model", tmp.path("m.txt")});
    CHECK(r.code == cli::kSat);
    CHECK(r.out.rfind("SAT", 0) == 0);
    CHECK(slurp(tmp.path("m.txt")).find("domain: e0 e1") != std::string::npos);
  }

  TEST_CASE("prove trace and budget") {
    Scratch tmp;
    std::string p = tmp.write("p.txt", "not(or(impl(p, q), impl(q, p)))\n");
    CHECK(run({"prove", "--preset", "ipc", "--refine-script", "ipc.refine", "--ub", "--budget-nodes", "1", p}).code ==
          cli::kUnknown);
    Run r = run({"prove", "--preset", "ipc", "--refine-script", "ipc.refine", "--ub", "--trace", tmp.path("t.txt"), p});
    CHECK(r.code == cli::kSat);
    CHECK(slurp(tmp.path("t.txt")).rfind("apply ", 0) == 0);
  }

  TEST_CASE("malformed input") {
    Scratch tmp;
    std::string p = tmp.write("bad.txt", "exists(r0, \n");
    CHECK(run({"prove", "--preset", "so", p}).code == cli::kMalformed);
    CHECK(run({"prove", "--preset", "so", "--search", "sideways", p}).code == cli::kMalformed);
    CHECK(run({"frobnicate"}).code == cli::kMalformed);
  }

  TEST_CASE("oracle verdicts") {
    Scratch tmp;
    std::string clash = tmp.write("c.txt", "p0\nnot(p0)\n");
    CHECK(run({"oracle", "--preset", "so", clash}).code == cli::kUnsat);
    CHECK(run({"oracle", "--preset", "so", "--serial", clash}).code == cli::kUnsat);
    CHECK(run({"oracle", "--preset", "so", "--inconclusive-bound", clash}).code == cli::kUnknown);
    std::string fork = tmp.write("f.txt", "not(or(impl(p, q), impl(q, p)))\n");
    CHECK(run({"oracle", "--preset", "ipc", fork}).code == cli::kSat);
    std::string big = tmp.write("b.txt", "exists(r0, exists(r0, p0))\nnot(p1)\n");
    CHECK(run({"oracle", "--preset", "so", "--max-bits", "2", big}).code == cli::kUnknown);
  }

  TEST_CASE("well-definedness export") {
    Scratch tmp;
    Run r = run({"check-wd", "--preset", "so", "--outdir", tmp.path("wd")});
    CHECK(r.code == 0);
    for (const char* f : {"wd1.p", "wd3_sing.p", "wd3_not.p", "wd3_or.p", "wd3_exists.p"})
      CHECK(fs::exists(tmp.path("wd") + "/" + f));
    CHECK(run({"check-wd", "--preset", "ipc", "--outdir", tmp.path("wd2")}).code == 0);
    CHECK(run({"check-wd", "--preset", "so", "--outdir", "/proc/tabsyn/wd"}).code == cli::kPipelineError);
  }

  TEST_CASE("corpus generation") {
    Scratch tmp;
    REQUIRE(run({"gen-corpus", "--logic", "so", "--count", "5", "--seed", "2", "-o", tmp.path("a.txt")}).code == 0);
    REQUIRE(run({"gen-corpus", "--logic", "so", "--count", "5", "--seed", "2", "-o", tmp.path("b.txt")}).code == 0);
    CHECK(slurp(tmp.path("a.txt")) == slurp(tmp.path("b.txt")));
    CHECK(parse_corpus(slurp(tmp.path("a.txt"))).size() == 5);
  }
}
