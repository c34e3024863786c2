#include <iostream>

#include "fractv/cli.hpp"

int main(int argc, char** argv) { return fractv::run_cli(argc, argv, std::cout, std::cerr); }
