#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tabsyn/engine.hpp"
#include "tabsyn/normalize.hpp"

namespace tabsyn {

// One frozen instance: "<id> <SAT|UNSAT> <root> ; <root> ..." per line.
struct CorpusEntry {
  std::string id;
  std::string expected;
  std::vector<std::string> roots;
  std::string problem_text() const;
};

std::vector<CorpusEntry> parse_corpus(const std::string& text);
std::string print_corpus(const std::vector<CorpusEntry>& entries);

struct GenOptions {
  std::string logic = "so";  // "so" or "ipc"
  std::uint64_t seed = 1;
  int max_depth = 4;
  int atoms = 2;
  bool nominal = true;  // SO only
  int max_roots = 3;    // SO only
  double clash = 0.5;   // SO only: chance of an extra root negating a generated subconcept
};

// Random root lists; IPC roots are negated formulae.
std::vector<std::vector<std::string>> random_problems(const GenOptions& opt, int count);

// Intuitionistic validity of a formula over bot/and/or/impl (contraction-free sequent search).
bool ipc_valid(Id formula);

}  // namespace tabsyn
