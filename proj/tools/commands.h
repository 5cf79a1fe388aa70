#ifndef LENSRECT_TOOLS_COMMANDS_H_
#define LENSRECT_TOOLS_COMMANDS_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace lensrect::cli {

// Runs the command line `args` (args[0] is the program name). Returns the
// process exit status: 0 when the requested artifacts were fully written,
// 1 on a runtime failure, 2 on a usage error.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace lensrect::cli

#endif  // LENSRECT_TOOLS_COMMANDS_H_
