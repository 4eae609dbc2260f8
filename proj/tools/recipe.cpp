#include <iostream>

#include "recipe/cli.hpp"

int main(int argc, char** argv) { return recipe::cli_main(argc, argv, std::cout, std::cerr); }
