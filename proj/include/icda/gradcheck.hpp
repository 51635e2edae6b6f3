#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace icda {

struct GradcheckOptions {
  std::uint64_t seed = 1;
  std::size_t configs = 24;
  double step = 1e-5;
  double tolerance = 1e-4;
  // Fault injection: perturbs the analytic L_md gradient so the check must fail.
  bool corrupt_gradient = false;
};

struct LossCheck {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t entries = 0;
};

struct GradcheckResult {
  std::vector<LossCheck> losses;  // L_o, L_n, L_md, L_cl
  std::size_t configs = 0;
  bool passed = false;
};

// Compares backpropagated parameter gradients of every loss against central
// finite differences on random small models (<= 3 layers, <= 32 units).
// Relative error is |a - n| / max(|a|, |n|, 1e-6).
GradcheckResult run_gradcheck(const GradcheckOptions& opts);

}  // namespace icda
