#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fzsl/matrix.hpp"
#include "fzsl/mlp.hpp"

namespace fzsl {

struct AdamConfig {
  float learning_rate = 1e-3f;
  float beta1 = 0.5f;
  float beta2 = 0.999f;
  float epsilon = 1e-8f;
};

// Optimizer state for a fixed list of tensors; moments mirror the parameter
// shapes and step_count advances by exactly one per update.
struct AdamState {
  int64_t step_count = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  AdamConfig config;

  static AdamState init(std::span<const Matrix* const> params, AdamConfig cfg);
};

// Standard bias-corrected Adam update, in place. `names` is used only for
// the error message when a gradient is non-finite.
void adam_step(std::span<Matrix* const> params,
               std::span<const Matrix* const> grads, AdamState& state,
               std::span<const char* const> names = {});

// Convenience for a whole MLP; tensor order w1, b1, w2, b2.
AdamState adam_state_for(const MlpParams& p, AdamConfig cfg);
void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state);

}  // namespace fzsl
