#pragma once

#include <stdexcept>
#include <string>

namespace qumode {

/// YES/NO promise of a decision problem does not hold for the instance.
struct PromiseViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A configured work budget (term count, Fock dimension, path count) was hit.
struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qumode
