#pragma once

#include <vector>

#include "calib/types.hpp"

namespace calib {

// Row-wise softmax with max-subtraction. Throws invalid_input on non-finite
// entries. Rows sum to 1 within 1e-12 and the per-row argmax is preserved.
Matrix softmax(const Matrix& logits);

// Scores of ps as probabilities (applies softmax when kind == Logits).
Matrix probabilities(const PredictionSet& ps);

// Scores of ps as logits (applies to_logits when kind == Probabilities).
Matrix logits(const PredictionSet& ps, double eps = 1e-12);

// Elementwise log(clip(p, eps, 1)). Argmax per row is preserved and
// softmax(to_logits(p)) == p within 1e-6 when all entries of p are >= eps.
Matrix to_logits(const Matrix& probs, double eps = 1e-12);

// Argmax / max-probability per row; ties break to the lowest class index.
PredictionView view(const PredictionSet& ps);

// Elementwise mean of same-shaped probability matrices. Throws invalid_input
// on an empty list or mismatched shapes.
Matrix average_ensemble(const std::vector<Matrix>& members);

// Weights such that each class present in `labels` contributes total mass
// n / C_present; absent classes get weight 0. Sum over examples is n.
ClassWeights balanced_weights(const LabelVector& labels, int class_count);

}  // namespace calib
