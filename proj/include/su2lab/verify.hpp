#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace su2lab {

/// One invariant check: passed iff measured <= threshold.
struct PropertyCheck {
  std::string id;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  int workers = 1;
};

/// Runs the library's invariant suites on fresh random instances. Suite
/// identifiers are stable: core.*, zeros.*, mc.*.
std::vector<PropertyCheck> run_invariant_suites(const VerifyOptions& options);

}  // namespace su2lab
