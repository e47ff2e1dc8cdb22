// SPDX-License-Identifier: Apache-2.0
//
// The `layoutprior` command line. Kept as a library so tests can drive the
// exact code path of the executable.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace layoutprior::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kInputError = 2, kShapeError = 3 };

/// `args` excludes the program name. Data goes to `out` (when no --out is
/// given), summaries and errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace layoutprior::cli
