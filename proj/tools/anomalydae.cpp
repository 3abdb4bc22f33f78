#include <iostream>

#include "anomalydae/cli.hpp"

int main(int argc, char** argv) { return anomalydae::cli::run(argc, argv, std::cout, std::cerr); }
