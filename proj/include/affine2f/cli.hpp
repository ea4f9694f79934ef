#pragma once

#include <iosfwd>

namespace affine2f::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kValidationError = 2;
inline constexpr int kNumericalError = 3;

/// Entry point of the `affine2f` tool. Artifacts go to `out` (or --output), the one-line
/// summary and diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace affine2f::cli
