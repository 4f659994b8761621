#include "figsim/cli.hpp"

int main(int argc, char** argv) { return figsim::cli_main(argc, argv); }
