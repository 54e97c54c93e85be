// Acceptance driver: runs every criterion, prints one pass/fail line per
// criterion, and exits nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "pwsbl/acceptance.hpp"

int main(int argc, char** argv) {
  pwsbl::acceptance::SuiteOptions opts;
  for (int i = 1; i < argc; ++i) opts.only.push_back(std::atoi(argv[i]));
  opts.on_result = [](const pwsbl::acceptance::CriterionResult& r) {
    std::printf("[%s] %2d  %-38s %7.2fs  %s\n", r.passed ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.seconds, r.detail.c_str());
    std::fflush(stdout);
  };
  const auto results = pwsbl::acceptance::run_all(opts);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::printf("%zu criteria, %d failed\n", results.size(), failed);
  return failed == 0 ? 0 : 1;
}
