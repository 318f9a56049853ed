#pragma once

#include <functional>
#include <string>
#include <vector>

namespace singheat {

/// Outcome of one built-in oracle comparison.
struct OracleResult {
  std::string module;
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

/// Runs every built-in analytic oracle in a fixed order. Deterministic: repeated runs produce
/// identical results. `progress` (optional) sees each result as soon as it is available.
std::vector<OracleResult> run_oracle_suite(const std::function<void(const OracleResult&)>& progress = {});

}  // namespace singheat
