#include <iostream>

#include "gkslcp/cli.hpp"

int main(int argc, char** argv) { return gkslcp::run_cli(argc, argv, std::cout, std::cerr); }
