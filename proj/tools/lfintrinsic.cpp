#include <string>
#include <vector>

#include "lfi/cli.hpp"

int main(int argc, char** argv) {
  return lfi::cli::run_cli(std::vector<std::string>(argv, argv + argc));
}
