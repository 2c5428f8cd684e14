#include <iostream>

#include "rpe/cli.hpp"

int main(int argc, char** argv) { return rpe::run_cli(argc, argv, std::cout, std::cerr); }
