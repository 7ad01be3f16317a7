#pragma once

#include <vector>

#include "vgforge/model/tape.hpp"

namespace vgforge::model {

/// -(1/N) sum_j sum_c y_jc log p_jc over probability rows, y one-hot or smoothed.
double ce_loss(const Matrix& probs, const std::vector<int>& labels, double smoothing = 0.0);

/// Same loss evaluated from logits through a stable log-sum-exp.
double ce_loss_from_logits(const Matrix& logits, const std::vector<int>& labels, double smoothing = 0.0);

/// d loss / d logits = (softmax - y) / N.
Matrix ce_grad_logits(const Matrix& logits, const std::vector<int>& labels, double smoothing = 0.0);

/// Pair-consistency cross-entropy over 2-way logits; consistency in {0, 1}.
double vgc_loss(const Matrix& pair_logits, const std::vector<int>& consistency);
Matrix vgc_grad_logits(const Matrix& pair_logits, const std::vector<int>& consistency);

}  // namespace vgforge::model
