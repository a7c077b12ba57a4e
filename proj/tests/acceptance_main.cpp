#include <iostream>

#include "semidisc/cli/acceptance.hpp"

int main() {
  using namespace semidisc::cli;
  int failed = 0;
  for (const auto& r : run_acceptance()) {
    std::cout << format_result(r) << std::endl;
    if (!r.passed) ++failed;
  }
  std::cout << (failed == 0 ? "10/10 criteria passed" : std::to_string(10 - failed) + "/10 criteria passed") << "\n";
  return failed == 0 ? 0 : 1;
}
