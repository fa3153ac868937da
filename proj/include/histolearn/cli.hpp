#pragma once

#include <iosfwd>

namespace histolearn::cli {

/// Runs one command line. Data goes to `out` (or the --out file),
/// diagnostics to `err`. Returns 0 on success, 1 on a usage error and 2
/// on a computation or I/O error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, on the process's standard streams.
int dispatch(int argc, const char* const* argv);

}  // namespace histolearn::cli
