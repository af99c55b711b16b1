#include "hifu_cli/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return hifu::cli::main(argc, argv, std::cout, std::cerr); }
