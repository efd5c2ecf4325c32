#include <iostream>
#include <string>
#include <vector>

#include "su2lab/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return su2lab::run_command(args, std::cout, std::cerr);
}
