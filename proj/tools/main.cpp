#include <iostream>
#include <string>
#include <vector>

#include "lopashka/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return lopashka::cli::run(args, std::cout, std::cerr);
}
