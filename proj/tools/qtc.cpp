#include <iostream>

#include "qtc/cli.hpp"

int main(int argc, char** argv) { return qtc::run_cli(argc, argv, std::cout, std::cerr); }
