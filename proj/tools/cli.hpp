#pragma once

#include <iosfwd>

namespace qcw::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  ///< numeric or verification failure
inline constexpr int kExitUsage = 2;

/// Entry point of the qcw tool. Output goes to --out (default stdout); diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Worker count: QCW_THREADS when set to a positive integer, else `requested`, else the core count.
int resolve_threads(int requested);

}  // namespace qcw::cli
