#include <iostream>

#include "evpirank/cli.hpp"

int main(int argc, char** argv) { return evpirank::run_cli(argc, argv, std::cout, std::cerr); }
