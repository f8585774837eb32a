#pragma once

#include <cstdint>

#include "fzsl/matrix.hpp"
#include "fzsl/rng.hpp"

namespace fzsl {

enum class Activation { None, Relu, LeakyRelu, Sigmoid };

// Two-layer perceptron parameters. Biases are stored as 1 x n matrices.
struct MlpParams {
  Matrix w1;  // hidden x in
  Matrix b1;  // 1 x hidden
  Matrix w2;  // out x hidden
  Matrix b2;  // 1 x out
  Activation hidden_act = Activation::LeakyRelu;
  float leaky_slope = 0.2f;
  Activation output_act = Activation::None;

  int in_dim() const { return w1.cols; }
  int hidden_dim() const { return w1.rows; }
  int out_dim() const { return w2.rows; }
  int64_t param_count() const;

  // Dimension consistency, positive sizes, finite entries.
  void validate() const;

  bool operator==(const MlpParams& o) const = default;
};

// Gradients (or Adam moments) shaped like MlpParams.
struct MlpGrads {
  Matrix w1, b1, w2, b2;

  static MlpGrads zeros_like(const MlpParams& p);
  void add_scaled(const MlpGrads& o, float scale);
  bool all_finite() const;
  bool operator==(const MlpGrads& o) const = default;
};

// Weights ~ N(0, 1/fan_in), biases zero. Draw order is fixed (w1 row-major,
// then w2 row-major) so equal streams give bit-identical parameters.
MlpParams mlp_init(int in, int hidden, int out, Activation hidden_act,
                   Activation output_act, RngStream& rng,
                   float leaky_slope = 0.2f);

// Row-wise act2(W2 * act1(W1 * x + b1) + b2).
Matrix mlp_forward(const MlpParams& p, const Matrix& input);

struct MlpBackwardResult {
  MlpGrads grads;
  Matrix input_grad;  // batch x in
};

// Exact reverse-mode gradients of the forward map; recomputes the forward
// pass internally.
MlpBackwardResult mlp_backward(const MlpParams& p, const Matrix& input,
                               const Matrix& output_grad);

}  // namespace fzsl
