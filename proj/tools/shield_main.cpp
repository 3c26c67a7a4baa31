#include <iostream>
#include <string>
#include <vector>

#include "shield/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return shield::cli::run(args, std::cout, std::cerr);
}
