#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ccbf::checks {

struct CheckOptions {
  std::uint64_t seed = 2024;
  int samples = 200;
  // Added to the analytic lf_h1 before comparison; nonzero values exercise the
  // failure path of the gradient suite.
  double analytic_bias = 0.0;
};

struct CheckOutcome {
  std::string suite;
  bool passed = true;
  std::string detail;  // first failing case, or a summary when passing
};

std::vector<std::string> suite_names();

// Runs one suite ("gradients", "weights", "qp", "dynamics") or "all".
std::vector<CheckOutcome> run_suite(const std::string& name,
                                    const CheckOptions& opts);

}  // namespace ccbf::checks
