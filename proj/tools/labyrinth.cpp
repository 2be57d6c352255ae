// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/cli/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return labyrinth::cli::run(std::vector<std::string>(argv, argv + argc), std::cin, std::cout, std::cerr);
}
