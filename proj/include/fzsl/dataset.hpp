#pragma once

#include <string>
#include <vector>

#include "fzsl/matrix.hpp"
#include "fzsl/rng.hpp"

namespace fzsl {

// Feature rows with class labels, one attribute vector per class, and the
// seen/unseen class split. Rows labeled with unseen classes are the held-out
// evaluation set; training code only ever touches seen-labeled rows.
struct Dataset {
  Matrix features;                       // n x d
  std::vector<int> labels;               // n, values in [0, C)
  std::vector<std::string> class_names;  // C
  Matrix attributes;                     // C x m
  std::vector<int> seen_classes;         // ascending
  std::vector<int> unseen_classes;       // ascending

  int num_rows() const { return features.rows; }
  int feature_dim() const { return features.cols; }
  int attr_dim() const { return attributes.cols; }
  int num_classes() const { return attributes.rows; }

  bool is_seen(int class_id) const;
  // Position of class_id within seen_classes; -1 when not seen.
  int seen_index(int class_id) const;
  // Row indices whose label is a seen / unseen class, ascending.
  std::vector<int> seen_rows() const;
  std::vector<int> unseen_rows() const;

  void validate() const;
};

// When loading a train view, rows labeled with unseen classes are rejected
// instead of carried along.
enum class DatasetView { Full, TrainOnly };

Dataset load_dataset(const std::string& features_path,
                     const std::string& attributes_path,
                     const std::string& split_path,
                     DatasetView view = DatasetView::Full);

void save_dataset(const Dataset& ds, const std::string& features_path,
                  const std::string& attributes_path,
                  const std::string& split_path);

// Shape of a synthetic benchmark: class attributes drawn uniform in [0,1),
// features = w_true * attr + gaussian noise, so unseen classes stay linearly
// predictable from their attributes.
struct SyntheticSpec {
  int seen_count = 20;
  int unseen_count = 5;
  int attr_dim = 16;
  int feature_dim = 32;
  int rows_per_class = 50;
  float noise_scale = 0.05f;  // noise standard deviation

  void validate() const;
};

struct SyntheticDataset {
  Dataset dataset;
  Matrix w_true;  // feature_dim x attr_dim, entries >= 0
};

SyntheticDataset make_synthetic(const SyntheticSpec& spec, RngStream& rng);

// One client's share: a disjoint slice of the seen classes and every row of
// those classes.
struct ClientPartition {
  int client_id = 0;
  std::vector<int> class_subset;  // ascending
  std::vector<int> row_indices;   // ascending
};

// Shuffle the seen classes and deal them round-robin; subset sizes differ by
// at most one.
std::vector<ClientPartition> partition_even(const Dataset& ds, int num_clients,
                                            RngStream& rng);

// Random split where every client receives at least ceil(|seen|/8) classes.
std::vector<ClientPartition> partition_uneven(const Dataset& ds,
                                              int num_clients, RngStream& rng);

// Disjointness, coverage of the seen set, and row membership.
void validate_partitions(const Dataset& ds,
                         const std::vector<ClientPartition>& parts);

// Mean over client pairs of the label-distribution skew statistic: the
// largest probability mass by which the two clients' seen-class label
// distributions disagree on any set of classes (the two-sample
// Kolmogorov-Smirnov statistic maximised over class orderings). 1 for
// disjoint label spaces, 0 for identical distributions.
double partition_skew(const std::vector<ClientPartition>& parts,
                      const Dataset& ds);

}  // namespace fzsl
