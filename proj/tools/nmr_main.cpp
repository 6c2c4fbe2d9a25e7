#include "nmr/cli/cli.hpp"

int main(int argc, char** argv) { return nmr::cli::run_cli(argc, argv); }
