#include <iostream>
#include <string>
#include <vector>

#include "agreeloss/cli.hpp"

int main(int argc, char** argv) {
  return agreeloss::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
