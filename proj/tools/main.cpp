#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return qcw::cli::run(argc, argv, std::cout, std::cerr); }
