#pragma once

#include <iosfwd>

namespace naswot::cli {

// Entry point of the `naswot` tool. Returns the process exit code: 0 iff
// the command completed. Failures print one line
// `error[<Tag>]: <message>` to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace naswot::cli
