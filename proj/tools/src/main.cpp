#include <iostream>

#include "bdex_cli/commands.hpp"

int main(int argc, char** argv) { return bdex::cli::run(argc, argv, std::cout, std::cerr); }
