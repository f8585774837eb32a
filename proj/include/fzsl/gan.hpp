#pragma once

#include "fzsl/mlp.hpp"
#include "fzsl/rng.hpp"

namespace fzsl {

// Conditional feature generator plus critic. The generator consumes
// [noise | condition] and emits a feature row; the critic consumes
// [feature | ground-truth attribute] and emits one score. The critic is
// always conditioned on the manual attribute vector, never on an augmented
// condition.
struct GanModel {
  MlpParams generator;
  MlpParams discriminator;
  int noise_dim = 0;

  bool operator==(const GanModel& o) const = default;

  // feature_dim/attr_dim/cond_dim are the widths the model must accept.
  void validate(int feature_dim, int attr_dim, int cond_dim) const;
};

// Generator: LeakyReLU hidden, ReLU output (CNN features are non-negative).
// Critic: LeakyReLU hidden, linear scalar output.
GanModel gan_init(int feature_dim, int attr_dim, int cond_dim, int noise_dim,
                  int hidden_dim, RngStream& generator_rng,
                  RngStream& discriminator_rng);

}  // namespace fzsl
