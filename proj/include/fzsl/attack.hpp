#pragma once

#include <vector>

#include "fzsl/classifier.hpp"
#include "fzsl/matrix.hpp"
#include "fzsl/mlp.hpp"
#include "fzsl/rng.hpp"

namespace fzsl {

// What an inversion can possibly recover. The mid-level path reconstructs a
// feature vector and an attribute condition; there is no pathway from
// gradients back to pixel space anywhere in this codebase.
enum class TargetKind { FeatureAndLabel, FeatureAndAttribute };

// Parameter gradients a client would transmit after one critic step on a
// small batch: d/dtheta of loss_scale * mean_i D([x_i | cond_i]).
struct GradientBundle {
  MlpGrads grads;
  int feature_dim = 0;
  int cond_dim = 0;
  int batch = 0;
};

inline constexpr int kMaxAttackBatch = 4;

GradientBundle capture_gradients(const MlpParams& critic,
                                 const Matrix& features, const Matrix& cond,
                                 float loss_scale = 1.0f);

// Gradients of softmax cross-entropy for a linear head, the high-level
// (class-supervised) attack surface.
struct ClassifierGradientBundle {
  Matrix w_grads;  // classes x feature_dim
  Matrix b_grads;  // 1 x classes
  int batch = 0;
};

ClassifierGradientBundle capture_classifier_gradients(
    const LinearClassifier& clf, const Matrix& features,
    std::span<const int> labels);

struct InversionResult {
  Matrix recovered_features;
  Matrix recovered_condition;  // attribute estimate or soft label
  float initial_residual = 0.0f;
  float final_residual = 0.0f;
  std::vector<float> residual_log;  // best-so-far, non-increasing
  int iterations = 0;
};

// Gradient-matching inversion: start dummy inputs from rng and run Adam on
// ||grads(dummy) - observed||^2 for `steps` iterations.
InversionResult dlg_invert(const GradientBundle& observed,
                           const MlpParams& critic_arch, int steps,
                           RngStream& rng);

InversionResult dlg_invert_classifier(const ClassifierGradientBundle& observed,
                                      const LinearClassifier& clf_arch,
                                      int steps, RngStream& rng);

struct LeakageReport {
  TargetKind kind = TargetKind::FeatureAndAttribute;
  float feature_cosine = 0.0f;
  float condition_cosine = 0.0f;  // attribute cosine, or one-hot label cosine
  float initial_residual = 0.0f;
  float final_residual = 0.0f;
  std::vector<float> residual_log;
  int iterations = 0;
};

float cosine_similarity(std::span<const float> a, std::span<const float> b);

struct LeakageDemoSpec {
  TargetKind kind = TargetKind::FeatureAndAttribute;
  int feature_dim = 16;
  int cond_dim = 8;    // attribute width (mid) or class count (high)
  int hidden_dim = 32;
  int steps = 2000;
  uint64_t seed = 0;
};

// Builds a victim model and batch, captures one step worth of gradients,
// runs the inversion, and scores the recovery against the ground truth.
LeakageReport run_leakage_demo(const LeakageDemoSpec& spec);

}  // namespace fzsl
