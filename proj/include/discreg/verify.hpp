#pragma once

#include <cstddef>
#include <cstdint>

namespace discreg {

struct EquivalenceSettings {
  std::size_t trials = 50;
  std::uint64_t seed = 7;
  std::size_t dataset_size = 50;
  std::size_t iterations = 200;
  double gamma_eval = 0.99;
  /// Factor applied to lambda in the negative-control runs.
  double perturbation = 1.1;
};

/// Worst-case discrepancies over all trials (max over gamma and m as well).
struct EquivalenceReport {
  double prop1 = 0.0;
  double prop2_expected_sarsa = 0.0;
  double prop2_sarsa = 0.0;
  double prop3 = 0.0;
  double lstd_decomposition = 0.0;  // max entrywise |A(g) - (A(ge) + (ge - g) C)|
  /// Smallest discrepancy seen with a perturbed lambda (should be large).
  double negative_control = 0.0;
  std::size_t trials = 0;
};

EquivalenceReport run_equivalence_suite(const EquivalenceSettings& settings);

}  // namespace discreg
