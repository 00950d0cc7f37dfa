#include <iostream>

#include "relbench/service/cli.hpp"

int main(int argc, char** argv) {
  return relbench::service::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
