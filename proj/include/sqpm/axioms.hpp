#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sqpm {

struct AxiomResult {
  std::string name;
  std::size_t checked = 0;
  std::size_t failures = 0;
  double worst_margin = 0.0;  ///< smallest (lhs - rhs) seen; negative beyond tolerance means failure
  bool gated = true;          ///< false for properties that are measured but not asserted

  bool passed() const noexcept { return !gated || failures == 0; }
};

/// Randomized property suite over softmax and sparsemax (L = 1) markets with
/// d in {2, 3, 5}, states q in [-10, 10]^d and bundles with ||r||_inf <= 10.
/// `samples` (q, r) pairs are drawn per property, split evenly over the
/// market configurations.
std::vector<AxiomResult> run_axiom_suite(std::size_t samples, std::uint64_t seed);

/// One line per property: "PASS name checked=... failures=... worst_margin=...".
void print_axiom_report(std::ostream& out, const std::vector<AxiomResult>& results);

}  // namespace sqpm
