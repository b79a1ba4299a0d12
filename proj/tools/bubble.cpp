#include <iostream>

#include "bubble/cli.hpp"

int main(int argc, char** argv) { return bubble::cli::run(argc, argv, std::cout, std::cerr); }
