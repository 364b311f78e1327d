#include <iostream>

#include "crit/cli.hpp"

int main(int argc, char** argv) { return crit::run_cli(argc, argv, std::cout, std::cerr); }
