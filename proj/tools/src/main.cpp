#include <iostream>

#include "ovcq_tools/cli.hpp"

int main(int argc, char** argv) { return ovcq::tools::run_cli(argc, argv, std::cout, std::cerr); }
