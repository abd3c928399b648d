#pragma once

// Runs a fixture's expected-value table through the pipeline.

#include <cstdint>
#include <string>
#include <vector>

#include "pwaff/catalog.hpp"

namespace pwaff {

struct VerifyOptions {
  int rho_samples = 2000;
  std::uint64_t seed = 1;
  std::size_t cell_cap = default_cell_cap();
};

struct CheckResult {
  Expectation expected;
  double observed = 0.0;
  bool passed = false;
  std::string detail;  // error text when the computation failed
};

struct VerifyReport {
  std::string fixture;
  std::vector<CheckResult> checks;
  double seconds = 0.0;

  bool passed() const;
};

bool evaluate_check(const Expectation& e, double observed, double verdict_lo = 0.0,
                    double verdict_hi = 0.0);

VerifyReport verify(const Fixture& fx, const VerifyOptions& options = {});

}  // namespace pwaff
