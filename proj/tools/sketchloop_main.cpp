#include "sketchloop/cli.hpp"

int main(int argc, char** argv) { return sketchloop::run_cli(argc, argv); }
