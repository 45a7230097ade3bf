#pragma once

#include "mmcon/losses.hpp"

namespace mmcon {

// Straightforward direct-summation implementations of the loss family,
// written without the log-sum-exp machinery and with their own similarity
// arithmetic. They exist as an independent route for cross-checking the
// optimized losses (the `oracle-check` CLI command and the test suites);
// they overflow for very small temperatures and are not meant for training.
LossValue reference_supcon_loss(const ContrastiveBatch& batch, const LossConfig& cfg);
LossValue reference_margin_con_loss(const ContrastiveBatch& batch, const LossConfig& cfg);
LossValue reference_mmcon_loss(const ContrastiveBatch& batch, const LossConfig& cfg);
LossValue reference_loss_forward(LossKind kind, const ContrastiveBatch& batch,
                                 const LossConfig& cfg);

}  // namespace mmcon
