#include <iostream>
#include <string>
#include <vector>

#include "pdvar/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pdvar::cli_dispatch(args, std::cout, std::cerr);
}
