#include <iostream>
#include <string>
#include <vector>

#include "sp2d/harness.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return sp2d::run_cli(args, std::cout, std::cerr);
}
