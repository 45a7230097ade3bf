#pragma once

#include <cstdint>

#include "mmcon/experiment.hpp"

namespace mmcon {

struct OracleCheckResult {
  int batches = 0;
  int comparisons = 0;
  double max_abs_diff = 0.0;
  double seconds = 0.0;
};

// Randomized small batches; the optimized loss implementations against the
// direct-summation references, over every loss kind, margin mode and
// denominator mode.
OracleCheckResult run_loss_oracle_check(std::uint64_t seed, int n_batches,
                                        int max_batch_embeddings = 8);

struct CompositionGradCheckResult {
  int configs = 0;
  double max_relative_error = 0.0;
  double seconds = 0.0;
};

// Each loss composed through the encoder(s): analytic backpropagation against
// central finite differences over every encoder parameter. Exercises the same
// encode/build/backprop path the training loop runs.
CompositionGradCheckResult run_composition_gradient_check(std::uint64_t seed,
                                                          int n_configs,
                                                          double fd_step = 1e-5);

}  // namespace mmcon
