#pragma once

namespace crasp::cli {

// Exit codes: 0 success, 1 verification mismatch, 2 usage error, 3 I/O error.
int cli_main(int argc, const char* const* argv);

}  // namespace crasp::cli
