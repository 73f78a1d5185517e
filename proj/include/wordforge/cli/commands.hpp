#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wf::cli {

// Entry point shared by the binary and the tests. `args` excludes the
// program name. Normal output goes to `out`; failures produce exactly one
// `error: ...` line on `err` and a nonzero status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wf::cli
