// One line per acceptance criterion; exit status 1 if any fails.

#include <cstdlib>
#include <iostream>
#include <string>

#include "dssalloc/acceptance.hpp"
#include "dssalloc/simulator.hpp"

int main(int argc, char** argv) {
  dssalloc::acceptance::Options options;
  if (argc > 1) options.trials = std::stoll(argv[1]);
  options.workers = dssalloc::default_workers();
  bool ok = true;
  dssalloc::acceptance::run_all(options, [&](const dssalloc::acceptance::Outcome& o) {
    std::cout << dssalloc::acceptance::format_line(o) << std::endl;
    ok = ok && o.passed;
  });
  return ok ? EXIT_SUCCESS : EXIT_FAILURE;
}
