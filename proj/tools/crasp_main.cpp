#include "crasp/cli.hpp"

int main(int argc, char** argv) { return crasp::cli::cli_main(argc, argv); }
