#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sparsetrain {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitParse = 2,       // unreadable file, malformed JSON, bad flags
  kExitValidation = 3,  // contract or invariant violation
};

/// Entry point for `sparsetrain <mask|merge|select|simulate> ...`. args
/// excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sparsetrain
