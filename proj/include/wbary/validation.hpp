#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wbary {

struct CheckResult {
  std::string name;
  bool passed;
  std::string detail;
};

/// Quick randomized self-check of the library invariants (matrix calculus,
/// deformed logarithms, W2, gradients, Lipschitz bounds, brackets, solver
/// agreement). Runs in a few seconds.
std::vector<CheckResult> run_invariant_suite(std::uint64_t seed);

}  // namespace wbary
