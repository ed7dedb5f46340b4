#include <iostream>

#include "sqclock/commands.hpp"

int main(int argc, char** argv) {
  return sqclock::run_cli(argc, argv, std::cout, std::cerr);
}
