#include <iostream>

#include "plbin/cli.hpp"

int main(int argc, char** argv) { return plbin::run_cli(argc, argv, std::cout, std::cerr); }
