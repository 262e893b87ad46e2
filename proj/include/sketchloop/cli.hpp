#pragma once

namespace sketchloop {

// Full command-line entry point (subcommands simulate / oracle /
// sketch-bench). Returns the process exit code: 0 success, 2 config
// errors, 1 anything else.
int run_cli(int argc, char** argv);

}  // namespace sketchloop
