#include <vector>

#include "eunsim/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return eunsim::run_cli(args);
}
