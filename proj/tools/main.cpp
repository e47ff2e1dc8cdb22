// SPDX-License-Identifier: Apache-2.0
#include <iostream>
#include <string>
#include <vector>

#include "commands.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  return layoutprior::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
