#include <iostream>

#include "klasian/cli.hpp"

int main(int argc, char** argv) { return klasian::cli::run(argc, argv, std::cout, std::cerr); }
