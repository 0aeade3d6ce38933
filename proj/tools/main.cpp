#include <iostream>

#include "ilsched/cli.hpp"

int main(int argc, char** argv) { return ilsched::run_cli(argc, argv, std::cout, std::cerr); }
