#include <iostream>

#include "crossbound/cli.hpp"

int main(int argc, char** argv) { return crossbound::cli::run(argc, argv, std::cout, std::cerr); }
