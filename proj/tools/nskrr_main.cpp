#include <iostream>

#include "nskrr/cli.hpp"

int main(int argc, char** argv) { return nskrr::cli::run_cli(argc, argv, std::cout, std::cerr); }
