#include "abst/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return abst::cli_main(argc, argv, std::cout, std::cerr); }
