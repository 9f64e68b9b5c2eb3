#pragma once

#include <iosfwd>

namespace bnmiss {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitDeadline = 3;

/// Runs one `bnmiss` command line: simulate, classify, learn, evaluate or bench.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bnmiss
