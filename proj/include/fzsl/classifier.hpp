#pragma once

#include <span>
#include <vector>

#include "fzsl/matrix.hpp"

namespace fzsl {

// Linear softmax classifier. Used both as the frozen supervision head inside
// the local GAN objective and as the test-time classifier trained on
// synthesized features.
struct LinearClassifier {
  Matrix weights;  // classes x feature_dim
  Matrix bias;     // 1 x classes

  int num_classes() const { return weights.rows; }
  int feature_dim() const { return weights.cols; }

  Matrix logits(const Matrix& features) const;
  // Argmax per row; ties break toward the lowest class index.
  std::vector<int> predict(const Matrix& features) const;

  bool operator==(const LinearClassifier& o) const = default;
};

// Gradient of a loss with respect to the classifier input, given the logit
// gradients (dX = dlogits * W). Lets a frozen head pass gradients through.
Matrix classifier_input_gradient(const LinearClassifier& clf,
                                 const Matrix& logit_grads);

// Full-batch Adam on softmax cross-entropy from zero initialisation, which
// makes training deterministic. Sets larger than 10k rows are processed in
// fixed-order chunks.
LinearClassifier train_linear_classifier(const Matrix& features,
                                         std::span<const int> labels,
                                         int num_classes, int epochs,
                                         float learning_rate);

}  // namespace fzsl
