#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace choquard {

/// Exit codes: 0 success, 1 validation failure (bad flag, bad config, failed check), 2 solver failure.
int cli_main(int argc, const char* const* argv);
/// Same, with argv[0] omitted and explicit streams (used by the tests).
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace choquard
