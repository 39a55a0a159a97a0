#pragma once

namespace xmodal::cli {

// Full command-line entry point; returns the process exit code
// (0 ok, 2 config error, 3 data error, 4 internal error).
int run(int argc, const char* const* argv);

}  // namespace xmodal::cli
