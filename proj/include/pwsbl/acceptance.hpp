// acceptance.hpp
//
// The acceptance battery: one entry per criterion, each returning a
// pass/fail verdict with a short numeric account.  The battery is shared
// by the `pwsbl suite` CLI verb and the acceptance test binary.

#pragma once

#include <functional>
#include <string>
#include <vector>

namespace pwsbl::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct SuiteOptions {
  std::function<void(const CriterionResult&)> on_result;  // called as results finish
  std::vector<int> only;                                  // empty: run everything
};

std::vector<CriterionResult> run_all(const SuiteOptions& opts = {});

}  // namespace pwsbl::acceptance
