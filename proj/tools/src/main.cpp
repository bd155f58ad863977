#include <iostream>

#include "roughkit_cli/commands.hpp"

int main(int argc, char** argv) { return roughkit::cli::run(argc, argv, std::cout, std::cerr); }
