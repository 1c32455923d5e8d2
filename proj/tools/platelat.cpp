#include <iostream>
#include <string>
#include <vector>

#include "platelat/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return platelat::run_cli(args, std::cerr);
}
