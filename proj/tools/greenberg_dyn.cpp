#include <iostream>

#include "greenberg/cli.hpp"

int main(int argc, char** argv) {
  return greenberg::cli::main(argc, argv, std::cout, std::cerr);
}
