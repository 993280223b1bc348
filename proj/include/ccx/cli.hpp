#pragma once

namespace ccx {

/// Parses the command line, runs the chosen suite and writes its report.
/// Returns 0 when every check passes, 1 when any fails and 2 on a usage error.
int run(int argc, char** argv);

}  // namespace ccx
