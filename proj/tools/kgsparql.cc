/*!
 *  Copyright (c) 2024 by Contributors
 * \file tools/kgsparql.cc
 */
#include <iostream>
#include <string>
#include <vector>

#include "kgsparql/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return kgsparql::RunCli(args, std::cout, std::cerr, std::cin);
}
