#include <iostream>
#include <string>
#include <vector>

#include "saekit/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return saekit::run_cli(args, std::cout, std::cerr);
}
