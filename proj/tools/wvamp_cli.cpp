#include <iostream>
#include <string>
#include <vector>

#include "wvamp/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return wvamp::run_cli(args, std::cout, std::cerr);
}
