#include <iostream>

#include "demix/cli.hpp"

int main(int argc, char** argv) {
  return demix::cli::run_cli(argc, argv, std::cout, std::cerr);
}
