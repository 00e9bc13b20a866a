#include <iostream>

#include "tampers/cli.hpp"

int main(int argc, char** argv) { return tampers::cli::run(argc, argv, std::cout, std::cerr); }
