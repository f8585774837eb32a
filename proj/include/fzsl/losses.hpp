#pragma once

#include <span>

#include "fzsl/matrix.hpp"
#include "fzsl/mlp.hpp"
#include "fzsl/rng.hpp"

namespace fzsl {

struct SoftmaxXentResult {
  float loss = 0.0f;      // mean over the batch of -log softmax(logits)[label]
  Matrix logit_grads;     // (softmax - onehot) / batch
};

SoftmaxXentResult softmax_cross_entropy(const Matrix& logits,
                                        std::span<const int> labels);

struct WassersteinResult {
  float critic_term = 0.0f;     // mean(d_fake) - mean(d_real)
  float generator_loss = 0.0f;  // -mean(d_fake)
};

WassersteinResult wasserstein_losses(std::span<const float> d_real,
                                     std::span<const float> d_fake);

struct GradientPenaltyResult {
  float penalty = 0.0f;  // mean over batch of (||grad_x D(x_hat, cond)|| - 1)^2
  MlpGrads critic_grads;
};

// Interpolates x_hat = eps*x_real + (1-eps)*x_fake per row with eps ~ U(0,1)
// drawn from rng, then penalises the critic's input-gradient norm on the
// feature block. Returns the penalty and its exact (a.e.) gradients with
// respect to the critic parameters. The critic must have a single output
// with no output activation.
GradientPenaltyResult gradient_penalty(const MlpParams& critic,
                                       const Matrix& x_real,
                                       const Matrix& x_fake, const Matrix& cond,
                                       RngStream& rng);

// Same with caller-supplied interpolation coefficients (one per row).
GradientPenaltyResult gradient_penalty_at(const MlpParams& critic,
                                          const Matrix& x_real,
                                          const Matrix& x_fake,
                                          const Matrix& cond,
                                          std::span<const float> eps);

}  // namespace fzsl
