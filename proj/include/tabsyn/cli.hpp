#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tabsyn::cli {

// Exit-code contract shared by every command.
enum Exit : int { kSat = 0, kPipelineError = 1, kMalformed = 2, kUnsat = 20, kUnknown = 30 };

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace tabsyn::cli
