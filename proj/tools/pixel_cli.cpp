#include <string>
#include <vector>

#include "pixel/cli.hpp"

int main(int argc, char** argv) {
  return pixel::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
