#include "cli.h"

int main(int argc, char** argv) {
  return consensus::cli::run(std::vector<std::string>(argv, argv + argc));
}
