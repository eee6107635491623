#pragma once
//
// samplerec/errors.hpp
//
// Exception types shared across the library. Plain argument mistakes use
// std::invalid_argument; the types below mark semantic failure modes that
// callers are expected to route on.
//

#include <stdexcept>
#include <string>

namespace samplerec {

// Configuration or CLI usage error. The CLI maps this to exit code 3.
struct invalid_config : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The sampling density lost its mass (non-finite, non-positive, or
// mis-normalized) on the attached grid.
struct degenerate_density : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A positive spectral tail was required but none is left at the requested
// cut. Callers should route to the exact finite-rank recovery path.
struct finite_rank_signal : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The resampling loop exhausted its attempts without meeting the
// concentration threshold.
struct concentration_failure : std::runtime_error {
  concentration_failure(double best, int tried, const std::string& msg)
      : std::runtime_error(msg), best_residual(best), attempts(tried) {}
  double best_residual;
  int attempts;
};

// The partition search refuses instances above its enumeration bound.
struct oracle_scope_exceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Adversary construction would exceed the configured level budget.
struct adversary_scope_exceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A recovery plan could not be assembled or failed its recorded invariants.
struct plan_failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace samplerec
