#include "fzsl/classifier.hpp"

#include <algorithm>
#include <stdexcept>

#include "fzsl/adam.hpp"
#include "fzsl/losses.hpp"

namespace fzsl {

namespace {
constexpr int kChunkRows = 10000;
}

Matrix LinearClassifier::logits(const Matrix& features) const {
  if (features.cols != feature_dim())
    throw std::invalid_argument("classifier: feature width mismatch");
  Matrix z(features.rows, num_classes());
  for (int i = 0; i < features.rows; ++i) {
    const float* x = features.row(i);
    for (int c = 0; c < num_classes(); ++c) {
      float s = bias.at(0, c);
      const float* w = weights.row(c);
      for (int k = 0; k < feature_dim(); ++k) s += w[k] * x[k];
      z.at(i, c) = s;
    }
  }
  return z;
}

std::vector<int> LinearClassifier::predict(const Matrix& features) const {
  Matrix z = logits(features);
  std::vector<int> out(static_cast<size_t>(z.rows));
  for (int i = 0; i < z.rows; ++i) {
    int best = 0;
    for (int c = 1; c < z.cols; ++c)
      if (z.at(i, c) > z.at(i, best)) best = c;
    out[i] = best;
  }
  return out;
}

Matrix classifier_input_gradient(const LinearClassifier& clf,
                                 const Matrix& logit_grads) {
  if (logit_grads.cols != clf.num_classes())
    throw std::invalid_argument("classifier: logit grad width mismatch");
  Matrix dx(logit_grads.rows, clf.feature_dim());
  for (int i = 0; i < logit_grads.rows; ++i)
    for (int k = 0; k < clf.feature_dim(); ++k) {
      float s = 0.0f;
      for (int c = 0; c < clf.num_classes(); ++c)
        s += logit_grads.at(i, c) * clf.weights.at(c, k);
      dx.at(i, k) = s;
    }
  return dx;
}

LinearClassifier train_linear_classifier(const Matrix& features,
                                         std::span<const int> labels,
                                         int num_classes, int epochs,
                                         float learning_rate) {
  if (features.rows == 0)
    throw std::invalid_argument("train_linear_classifier: no rows");
  if (static_cast<int>(labels.size()) != features.rows)
    throw std::invalid_argument("train_linear_classifier: label count");
  if (num_classes <= 0)
    throw std::invalid_argument("train_linear_classifier: num_classes");

  LinearClassifier clf;
  clf.weights = Matrix(num_classes, features.cols);
  clf.bias = Matrix(1, num_classes);

  Matrix* params[] = {&clf.weights, &clf.bias};
  const Matrix* param_views[] = {&clf.weights, &clf.bias};
  AdamState opt =
      AdamState::init(param_views, AdamConfig{learning_rate, 0.9f, 0.999f});

  const int n = features.rows;
  for (int e = 0; e < epochs; ++e) {
    for (int start = 0; start < n; start += kChunkRows) {
      const int end = std::min(n, start + kChunkRows);
      const int b = end - start;
      Matrix dw(num_classes, features.cols);
      Matrix db(1, num_classes);
      // logits and CE gradient for the chunk
      Matrix chunk(b, features.cols);
      std::vector<int> chunk_labels(static_cast<size_t>(b));
      for (int i = 0; i < b; ++i) {
        const float* src = features.row(start + i);
        std::copy(src, src + features.cols, chunk.row(i));
        chunk_labels[i] = labels[start + i];
      }
      Matrix z = clf.logits(chunk);
      SoftmaxXentResult ce = softmax_cross_entropy(z, chunk_labels);
      for (int c = 0; c < num_classes; ++c) {
        for (int k = 0; k < features.cols; ++k) {
          float s = 0.0f;
          for (int i = 0; i < b; ++i)
            s += ce.logit_grads.at(i, c) * chunk.at(i, k);
          dw.at(c, k) = s;
        }
        float s = 0.0f;
        for (int i = 0; i < b; ++i) s += ce.logit_grads.at(i, c);
        db.at(0, c) = s;
      }
      const Matrix* gs[] = {&dw, &db};
      static constexpr const char* kNames[] = {"weights", "bias"};
      adam_step(params, gs, opt, kNames);
    }
  }
  return clf;
}

}  // namespace fzsl
