#include <iostream>
#include <string>
#include <vector>

#include "akm/report.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return akm::run_command(args, std::cout, std::cerr);
}
