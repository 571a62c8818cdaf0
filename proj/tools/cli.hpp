#pragma once

#include <iosfwd>

namespace vigilkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Parses argv, runs one subcommand and writes its artifacts plus
/// manifest.json under --out. Nothing is written when an input is missing
/// or a stage fails before the write phase.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vigilkit::cli
