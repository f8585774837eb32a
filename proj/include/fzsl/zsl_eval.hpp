#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fzsl/classifier.hpp"
#include "fzsl/dataset.hpp"
#include "fzsl/embeddings.hpp"
#include "fzsl/mlp.hpp"
#include "fzsl/rng.hpp"

namespace fzsl {

// Synthesized pseudo-features: exactly per_class rows for each unseen class,
// grouped by class in ascending class order.
struct PseudoSet {
  Matrix features;
  std::vector<int> labels;  // global unseen class ids
  // provenance
  uint64_t generator_digest = 0;
  bool ska = false;
  float gamma = 0.0f;
  int per_class = 0;
  uint64_t seed = 0;
  std::string rng_label;
};

uint64_t mlp_digest(const MlpParams& p);

// Draws per_class samples x = G(z, cond) for every unseen class. Without SKA
// the condition is the class attribute row; with SKA it is the augmented
// attribute, re-noised per sample when resample_per_draw is set.
PseudoSet synthesize_features(const MlpParams& generator, int noise_dim,
                              const Dataset& ds,
                              const EmbeddingTable* embeddings, int per_class,
                              const SkaConfig& ska, RngStream& rng);

// Linear softmax over the unseen classes, trained on pseudo-features only.
LinearClassifier train_softmax_classifier(const PseudoSet& pseudo,
                                          const std::vector<int>& class_set,
                                          int epochs, float learning_rate);

// Unweighted mean over classes of the per-class top-1 accuracy. Every class
// in class_set must have at least one test row.
double per_class_top1_from_predictions(std::span<const int> predicted,
                                       std::span<const int> labels,
                                       std::span<const int> class_set);

double per_class_top1(const LinearClassifier& clf, const Matrix& features,
                      std::span<const int> labels,
                      std::span<const int> class_set);

struct EvalConfig {
  int per_class = 300;
  SkaConfig ska;
  int epochs = 100;
  float learning_rate = 1e-3f;
};

struct EvalReport {
  double top1 = 0.0;
  std::vector<double> per_class;  // aligned with dataset unseen_classes
  uint64_t generator_digest = 0;
  int synthesized_per_class = 0;
};

// synthesize -> train classifier on pseudo rows -> score real unseen rows.
// Real unseen features are only ever read by the final scoring step.
EvalReport evaluate_unseen(const MlpParams& generator, const Dataset& ds,
                           const EmbeddingTable* embeddings,
                           const EvalConfig& config, RngStream& rng);

}  // namespace fzsl
