#include <iostream>

#include "dynmatch/cli.hpp"

int main(int argc, char** argv) { return dynmatch::run_cli(argc, argv, std::cout, std::cerr); }
