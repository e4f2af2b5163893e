#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace clothtrack {

// Process exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,    // unknown flag, missing or malformed argument
  kExitIo = 3,       // unreadable or malformed file
  kExitConfig = 4,   // configuration failed validation
  kExitRuntime = 5,  // tracking or simulation failure
};

// `args` excludes the program name. Failures print one JSON error record to
// `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace clothtrack
