#include <iostream>

#include "gchroma/cli.hpp"

int main(int argc, char** argv) { return gchroma::run_cli(argc, argv, std::cout, std::cerr); }
