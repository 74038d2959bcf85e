#pragma once

namespace latreg {

/// Command-line entry point. Exit codes: 0 success, 2 configuration or
/// argument errors, 3 numerical errors, 4 I/O errors.
int run_cli(int argc, const char* const* argv);

}  // namespace latreg
