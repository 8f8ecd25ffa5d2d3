#pragma once

#include <iosfwd>

namespace pathkg::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kIo = 3,
  kFormat = 4,
  kConfig = 5,
  kSampling = 6,
  kMissingEmbedding = 7,
};

// Runs one subcommand. Normal output goes to `out`; failures print a single
// `error<TAB>code<TAB>kind<TAB>message` line to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pathkg::cli
