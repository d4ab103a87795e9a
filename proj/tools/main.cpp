#include <iostream>

#include "wbary/cli.hpp"

int main(int argc, char** argv) { return wbary::cli_main(argc, argv, std::cout, std::cerr); }
