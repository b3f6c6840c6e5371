#include <iostream>

#include "rr_cli.hpp"

int main(int argc, char** argv) { return rrx::cli::run(argc, argv, std::cout, std::cerr); }
