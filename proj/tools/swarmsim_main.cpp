#include <iostream>

#include "swarmsim/cli.hpp"

int main(int argc, char** argv) { return swarmsim::cli::run(argc, argv, std::cout, std::cerr); }
