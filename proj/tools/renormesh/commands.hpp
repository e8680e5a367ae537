#pragma once

#include <iosfwd>

namespace renormesh::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitCheck = 4,
};

/// Entry point of the renormesh tool. Human-readable progress goes to `err`;
/// `out` receives only command results (the accepted TOL, oracle values).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace renormesh::cli
