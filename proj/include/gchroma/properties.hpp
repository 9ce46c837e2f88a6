#pragma once

// Randomised property suites over the Q-matrix optimisation and the graphon layer.

#include <cstdint>
#include <string>
#include <vector>

namespace gchroma {

struct SuiteResult {
  std::string name;
  int instances = 0;
  int failures = 0;
  double worst = 0.0;        // largest violation seen (0 when none)
  std::string first_failure; // description of the first failing instance
  bool passed() const { return failures == 0; }
};

/// Names accepted by run_property_suites, in run order.
const std::vector<std::string>& property_suite_names();

/// Runs `trials` random instances of each selected suite (all when `only` is empty).
/// trials == 0 yields an empty report.
std::vector<SuiteResult> run_property_suites(std::uint64_t seed, int trials,
                                             const std::vector<std::string>& only = {});

}  // namespace gchroma
