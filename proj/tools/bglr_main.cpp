#include <iostream>

#include "bglr/cli.hpp"

int main(int argc, char** argv) {
  return bglr::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
