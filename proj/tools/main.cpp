#include <iostream>

#include "clbm/cli.hpp"

int main(int argc, char** argv) { return clbm::run_cli(argc, argv, std::cout, std::cerr); }
