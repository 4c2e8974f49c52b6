// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "evince/cli.hpp"

int main(int argc, char** argv) { return evince::cli::run_cli(argc, argv, std::cout, std::cerr); }
