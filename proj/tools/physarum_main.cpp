// SPDX-License-Identifier: Apache-2.0
#include <string>
#include <vector>

#include "physarum/cli.hpp"

int main(int argc, char** argv) {
  return physarum::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
