#pragma once

namespace losscap_cli {

// Parses and dispatches the command line. Throws losscap exceptions; the
// caller maps them to exit codes.
int run(int argc, char** argv);

}  // namespace losscap_cli
