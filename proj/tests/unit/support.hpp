// Shared fixtures for the unit suites.
#pragma once

#include <functional>
#include <string>

#include "tabsyn/normalize.hpp"
#include "tabsyn/refine.hpp"
#include "tabsyn/spec.hpp"
#include "tabsyn/synth.hpp"

namespace tabsyn::test {

inline const NormalizedSpec& spec_of(const std::string& logic) {
  static const NormalizedSpec so = normalize(preset("so"));
  static const NormalizedSpec ipc = normalize(preset("ipc"));
  return logic == "so" ? so : ipc;
}

inline const Calculus& synthesized(const std::string& logic) {
  static const Calculus so = synthesize(spec_of("so"));
  static const Calculus ipc = synthesize(spec_of("ipc"));
  return logic == "so" ? so : ipc;
}

inline const Calculus& refined(const std::string& logic) {
  static const Calculus so =
      apply_script(synthesized("so"), parse_script(*preset_resource("so.refine")));
  static const Calculus ipc =
      apply_script(synthesized("ipc"), parse_script(*preset_resource("ipc.refine")));
  return logic == "so" ? so : ipc;
}

inline F formula(const Signature& sig, const std::string& text, ParseMode mode = ParseMode::Schematic) {
  ParseContext ctx;
  ctx.sig = &sig;
  ctx.mode = mode;
  return parse_formula(text, ctx);
}

inline Id lexpr(const Signature& sig, const std::string& text, int sort,
                ParseMode mode = ParseMode::Ground) {
  ParseContext ctx;
  ctx.sig = &sig;
  ctx.mode = mode;
  return parse_lexpr(text, ctx, sort);
}

inline std::string error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace tabsyn::test
