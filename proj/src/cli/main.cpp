#include <iostream>

#include "palette_forge/cli.hpp"

int main(int argc, char** argv) { return palette_forge::cli::run(argc, argv, std::cout, std::cerr); }
