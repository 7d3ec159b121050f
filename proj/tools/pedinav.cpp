#include "pedinav/commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return pedinav::cli::run(args, std::cout, std::cerr);
}
