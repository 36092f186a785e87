#include <iostream>
#include <string>
#include <vector>

#include "surmr/cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return surmr::cli::run(args, std::cout, std::cerr);
}
