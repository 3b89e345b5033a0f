#include <iostream>
#include <string>
#include <vector>

#include "dhnet/cli.hpp"
#include "dhnet/runtime.hpp"

int main(int argc, char** argv) {
  dhnet::tune_allocator();
  std::vector<std::string> args(argv + 1, argv + argc);
  return dhnet::run_cli(args, std::cout, std::cerr);
}
