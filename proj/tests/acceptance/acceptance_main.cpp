// One line per acceptance criterion; exit status 0 only if every line passes.
#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "dgue/verify.hpp"

using namespace dgue;

int main(int argc, char** argv) {
  SuiteOptions opt;
  if (argc > 1) opt.seed = std::strtoull(argv[1], nullptr, 10);
  int failed = 0;
  for (const auto& c : full_suite(opt)) {
    auto r = run_check(c);
    if (r.pass && r.time_limit > 0.0 && r.seconds > r.time_limit) {
      r.pass = false;
      r.measured += " (over time limit)";
    }
    failed += !r.pass;
    std::cout << format_result(r, true) << std::endl;
  }
  std::cout << (failed == 0 ? "all acceptance criteria pass" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
