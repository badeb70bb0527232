#include <iostream>

#include "dvrp/cli.hpp"

int main(int argc, char** argv) { return dvrp::run_cli(argc, argv, std::cout, std::cerr); }
