#include <string>
#include <vector>

#include "olfalign/cli.hpp"

int main(int argc, char** argv) {
  return olfalign::cli::execute(std::vector<std::string>(argv, argv + argc));
}
