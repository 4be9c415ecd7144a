#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tabsyn/calculus.hpp"

namespace tabsyn {

// ---------------------------------------------------------------- Tr context

struct TemplateText {
  std::string pred;  // "nu1", "nu2", "eq", or a predicate name
  bool positive = true;
  std::vector<std::string> params;
  std::string expr;
};

struct TrContext {
  std::vector<Connective> connectives;          // added to the object language
  std::map<std::string, std::string> epsilon;  // domain variable -> sort-0 variable
  std::map<std::string, std::string> functions;  // FO function -> connective name
  std::vector<TemplateText> templates;

  const TemplateText* find(const std::string& pred, bool positive) const;
};

TrContext parse_ctx(const std::string& text);
std::string print_ctx(const TrContext& ctx);

// ---------------------------------------------------------------- scripts

struct RefineStep {
  enum class Type { Rf, Tr, Simplify, Drop, Ub };
  Type type = Type::Simplify;
  std::string rule_id;     // Rf, Drop
  std::vector<int> fold;   // Rf: 0-based denominator indices
  bool drop_dp = false;    // Rf
  bool unsafe = false;     // Rf
  std::string ctx;         // Tr: context file name
  UbConfig ub;             // Ub
};

struct RefinementScript {
  std::vector<RefineStep> steps;
};

RefinementScript parse_script(const std::string& text);
std::string print_script(const RefinementScript& s);

struct RefineOptions {
  bool unsafe = false;
  // Resolves context file names; defaults to the file system then embedded presets.
  std::function<std::string(const std::string&)> load;
};

// ---------------------------------------------------------------- operations

// Rf: moves the complements of the folded denominators into the premises.
Calculus refine_rule(const Calculus& c, const std::string& id, const std::vector<int>& fold,
                     bool drop_dp, bool unsafe = false);
// True when the fold belongs to the admissible pattern whitelist.
bool rf_whitelisted(const Calculus& c, const Rule& r, const std::vector<int>& fold);

// Tr: rewrites every literal into labelled concepts.
Calculus internalize(const Calculus& c, const TrContext& ctx);

struct SimplifyReport {
  std::vector<std::string> removed;  // "<id>: <reason>"
  std::vector<std::string> pruned;   // "<id>: <literal>"
};
Calculus simplify(const Calculus& c, SimplifyReport* report = nullptr);

// Removes a rule after checking that its conclusions are derivable from its
// premises by the remaining rules.
Calculus drop_rule(const Calculus& c, const std::string& id, int rounds = 4);

Calculus attach_ub(const Calculus& c, const UbConfig& cfg);

Calculus apply_script(const Calculus& c, const RefinementScript& s, const RefineOptions& opt = {},
                      std::vector<std::string>* log = nullptr);

// Embedded refinement resources: "so.refine", "ipc.refine", "tr/so.ctx".
const std::string* preset_resource(const std::string& name);

}  // namespace tabsyn
