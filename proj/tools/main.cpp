#include <iostream>
#include <string>
#include <vector>

#include "exactbp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return exactbp::run_cli(args, std::cout, std::cerr);
}
