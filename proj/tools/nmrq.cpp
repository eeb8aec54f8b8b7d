#include "nmrq/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return nmrq::run_cli(argc, argv, std::cout, std::cerr); }
