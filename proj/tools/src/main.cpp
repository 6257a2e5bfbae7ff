#include "dpq2p1_cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return dpq2p1::cli::run(argc, argv, std::cout, std::cerr); }
