#pragma once

// Operator command line: init, ingest, validate, reindex, search, compose,
// export, migrate and serve. Exit codes: 0 success, 1 validation or request
// failures, 2 usage errors, 3 storage errors.

#include <ostream>

#include "sia/result.hpp"

namespace sia::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitStorage = 3;

int exit_code(ErrorCode code);

/// Runs one command. `serve` blocks until SIGINT or SIGTERM.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sia::cli
