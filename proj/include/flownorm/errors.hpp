#pragma once

#include <stdexcept>
#include <string>

namespace flownorm {

// Process exit codes, one per error category. The CLI maps a caught
// exception to the code of its category; anything uncategorized exits 1.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitNumeric = 4,
  kExitIo = 5,
};

struct Error : std::runtime_error {
  Error(int code, const std::string& what) : std::runtime_error(what), exit_code(code) {}
  int exit_code;
};

// Invalid or inconsistent configuration: bad parameter bounds, unknown
// config keys, malformed flag values.
struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(kExitConfig, what) {}
};

// Input data problems: missing/unreadable input files, malformed panel
// headers, inputs whose shape makes the requested operation meaningless.
struct DataError : Error {
  explicit DataError(const std::string& what) : Error(kExitData, what) {}
};

// Degenerate or failed numerics: zero-variance inputs, rank-deficient
// regressions, non-convergent iterations.
struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error(kExitNumeric, what) {}
};

// Output-side I/O failures: unwritable paths, failed writes.
struct IoError : Error {
  explicit IoError(const std::string& what) : Error(kExitIo, what) {}
};

}  // namespace flownorm
