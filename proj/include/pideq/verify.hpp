#pragma once

#include <string>
#include <vector>

namespace pideq {

struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// Numbered invariant checks. 1-8 and 12 make up the `verify` suite; 9-11
// exercise the nonlinear solver and take several minutes.
std::vector<CheckResult> run_checks(const std::vector<int>& ids);

const std::vector<int>& verify_suite();

std::string format_check(const CheckResult& r);

}  // namespace pideq
