#include <iostream>

#include "edgeroute/cli.hpp"

int main(int argc, char** argv) { return edgeroute::cli_run(argc, argv, std::cout, std::cerr); }
