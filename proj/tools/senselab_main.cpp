#include <string>
#include <vector>

#include "senselab/cli/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return senselab::cli::run(std::move(args));
}
