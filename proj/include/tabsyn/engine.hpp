#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tabsyn/calculus.hpp"

namespace tabsyn {

// Input concepts with their root polarity.
struct Problem {
  struct Root {
    bool positive = true;
    Id expr = kNoId;
  };
  std::vector<Root> roots;
};

// One concept per line; '#' comments; a top-level not(C) whose 'not' is not a
// connective of the signature denotes a negated root.
Problem parse_problem(const std::string& text, const Signature& sig);
std::string print_problem(const Problem& p);

enum class Verdict { Unsatisfiable, Satisfiable, ResourceLimit };
std::string verdict_name(Verdict v);

enum class Search { DepthFirst, BreadthFirst };

struct EngineOptions {
  Search search = Search::DepthFirst;
  std::int64_t max_applications = 1'000'000;
  double max_seconds = 0;  // 0: unlimited
  bool trace = false;
  std::size_t trace_cap = 200'000;
  // When set, every L-expression of a derived literal must belong to this set.
  const std::set<Id>* subexpressions = nullptr;
};

struct Instance {
  int rule = -1;
  std::vector<Id> slots;
};

class Engine;
struct Choice;

// Per-branch state. Literals only grow; indices are rebuilt on copy.
class Branch {
 public:
  int id = 0;
  const std::vector<Id>& literals() const { return lits_; }
  bool contains(Id lit) const { return set_.count(lit) > 0; }
  // Domain terms in order of first appearance.
  const std::vector<Id>& terms() const { return terms_; }
  int birth(Id term) const;  // -1 when unknown
  const std::unordered_set<Id>& blocked() const { return blocked_; }
  bool closed() const { return closed_; }
  bool saturated() const { return saturated_; }
  std::int64_t term_applications() const { return tp_count_; }

 private:
  friend class Engine;
  struct Queued {
    Id fp;
    Instance inst;
  };
  std::vector<Id> lits_;
  std::unordered_map<Id, int> set_;  // literal -> dependency set
  std::unordered_map<std::int64_t, std::vector<Id>> by_pred_;
  std::unordered_map<std::uint64_t, std::vector<Id>> by_arg_;
  std::unordered_map<std::uint64_t, std::vector<Id>> by_head_;
  std::vector<Id> terms_;
  std::unordered_map<Id, int> birth_;
  std::unordered_set<Id> blocked_;
  std::unordered_map<Id, std::pair<Id, int>> rep_;  // blocked term -> smaller equal term, dependency set
  std::shared_ptr<Choice> choice_;  // latest choice point on the path
  int level_ = 0;
  int close_dep_ = 0;
  std::unordered_set<Id> applied_;  // fingerprints fired or discharged
  std::unordered_set<Id> queued_;
  std::vector<std::vector<Queued>> queues_;  // per priority class, FIFO
  std::vector<std::size_t> heads_;
  std::int64_t tp_count_ = 0;
  bool closed_ = false;
  bool saturated_ = false;
};

// term_order: -1 if t < u, 0 if equal, 1 if t > u.
int term_order(const Branch& b, Id t, Id u);

struct EngineStats {
  std::int64_t applications = 0;
  std::int64_t branches = 0;
  std::int64_t closed = 0;
  std::int64_t blocked_instances = 0;
  std::int64_t retargeted = 0;
  std::int64_t backjumps = 0;
  std::size_t max_branch_size = 0;
  double seconds = 0;
};

struct ProofResult {
  Verdict verdict = Verdict::ResourceLimit;
  std::shared_ptr<Branch> branch;  // saturated open branch for Satisfiable
  Id root_constant = kNoId;
  std::vector<Id> root_literals;
  EngineStats stats;
  std::vector<std::string> trace;
  std::vector<std::string> subexpression_violations;
  std::vector<std::string> blocking_violations;
  std::string reason;
};

class Engine {
 public:
  Engine(const Calculus& calc, EngineOptions opt = {});
  ~Engine();

  // Root branch holding the root literals of the problem.
  std::shared_ptr<Branch> init(const Problem& p);
  Id root_constant() const { return root_const_; }

  // All not-yet-applied premise instantiations of a rule (naive matching).
  std::vector<Instance> applicable_instances(const Branch& b, int rule) const;
  // Applies an instance: returns the successor branches (empty when closed).
  std::vector<std::shared_ptr<Branch>> apply(const std::shared_ptr<Branch>& b, const Instance& in);

  ProofResult expand(const Problem& p);

  std::string show_instance(const Instance& in) const;
  int rule_index(const std::string& id) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Id root_const_ = kNoId;
};

// Convenience wrapper.
ProofResult prove(const Calculus& calc, const Problem& p, const EngineOptions& opt = {});

}  // namespace tabsyn
