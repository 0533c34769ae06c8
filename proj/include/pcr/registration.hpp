#pragma once

#include <vector>

#include "pcr/geometry.hpp"

namespace pcr {

// Outcome of one registration run. The overall transform equals the
// composition of the per-iteration increments, latest applied last:
// T = T(n) * ... * T(1).
struct RegistrationResult {
  RigidTransform transform;
  std::vector<RigidTransform> per_iteration;
  int iterations_used = 0;
  bool converged = false;
  double elapsed_seconds = 0.0;

  // ICP only: mean squared correspondence distance after each iteration.
  std::vector<double> correspondence_mse;
};

// Folds the per-iteration increments per the composition rule above.
inline RigidTransform compose_chain(const std::vector<RigidTransform>& steps) {
  RigidTransform acc;
  for (const auto& step : steps) {
    acc = compose(step, acc);
  }
  return acc;
}

}  // namespace pcr
