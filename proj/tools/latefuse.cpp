#include <iostream>

#include "latefuse/cli/cli.hpp"

int main(int argc, char** argv) {
  return latefuse::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
