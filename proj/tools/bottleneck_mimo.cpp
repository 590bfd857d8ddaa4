#include <iostream>

#include "bnmimo/cli.hpp"

int main(int argc, char** argv) { return bnmimo::cli::run(argc, argv, std::cout, std::cerr); }
