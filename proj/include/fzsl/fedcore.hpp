#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fzsl/adam.hpp"
#include "fzsl/classifier.hpp"
#include "fzsl/dataset.hpp"
#include "fzsl/embeddings.hpp"
#include "fzsl/gan.hpp"

namespace fzsl {

enum class AggregationMode { Holistic, GeneratorOnly };

// All federation, GAN and augmentation hyperparameters plus the run seed.
// Execution options that cannot change results (threading) live elsewhere.
struct FedConfig {
  int num_clients = 4;
  float client_fraction = 1.0f;  // S
  int local_epochs = 1;          // E
  int rounds = 100;              // T
  float beta = 0.01f;            // weight on the classification loss
  int cls_pretrain_epochs = 100;
  float cls_learning_rate = 1e-3f;
  int batch_size = 64;
  float learning_rate = 1e-3f;
  int n_critic = 5;
  float gp_lambda = 10.0f;
  AggregationMode aggregation_mode = AggregationMode::GeneratorOnly;
  bool uneven_partition = false;  // classes split unevenly with a floor
  SkaConfig ska;
  int synth_per_class = 300;  // M
  uint64_t global_seed = 0;
  int hidden_dim = 64;        // 4096 is the real-feature scale
  int noise_dim = 0;          // 0: use the attribute width
  int eval_every = 0;         // 0: no evaluation during training
  int eval_epochs = 100;
  float eval_learning_rate = 1e-3f;

  int selection_size() const;
  void validate() const;
};

struct ClientState {
  ClientPartition partition;
  GanModel model;
  LinearClassifier cls_head;  // frozen after pretraining
  AdamState generator_opt;
  AdamState discriminator_opt;
};

struct RoundMetrics {
  int round = 0;  // 1-based, strictly increasing
  std::vector<int> selected_clients;
  float mean_critic_loss = 0.0f;
  float mean_generator_loss = 0.0f;
  float mean_cls_loss = 0.0f;
  std::optional<float> unseen_top1;
  int64_t uploaded_params = 0;    // client -> server this round
  int64_t downloaded_params = 0;  // server -> clients this round
  int64_t wall_time_ms = 0;       // informational; never serialized
};

// Server-side view of the model. The discriminator is only populated by
// holistic aggregation; generator-only aggregation never sees one.
struct GlobalModel {
  MlpParams generator;
  std::optional<MlpParams> discriminator;
  int noise_dim = 0;
};

// Uniformly random subset of size max(1, round(N*S)), drawn from the
// (seed, round) server stream and returned ascending.
std::vector<int> select_clients(int num_clients, float fraction, int round,
                                uint64_t global_seed);

// Coordinate-wise unweighted mean over the selected models, consumed in
// ascending client-id order. Accumulation is double so the result is within
// rounding of the exact mean. GeneratorOnly averages generators and leaves
// discriminators out of the payload entirely.
GlobalModel aggregate(const std::vector<const GanModel*>& models,
                      AggregationMode mode);

// Reinitializes every client (selected or not) from the global model. In
// GeneratorOnly mode client discriminators are left bit-untouched.
void broadcast(const GlobalModel& global, std::vector<ClientState>& clients,
               AggregationMode mode);

// Per-round parameter traffic (upload + download) under a mode.
int64_t transmitted_params_per_round(const GanModel& arch,
                                     AggregationMode mode, int num_selected,
                                     int num_clients);

// Trains the frozen supervision head on the client's real rows. Labels are
// global seen-class indices so heads agree in width across clients.
LinearClassifier pretrain_local_classifier(const Dataset& ds,
                                           const ClientPartition& part,
                                           int epochs, float learning_rate,
                                           int num_seen_classes);

struct LocalTrainStats {
  float mean_critic_loss = 0.0f;
  float mean_generator_loss = 0.0f;
  float mean_cls_loss = 0.0f;
  int steps = 0;
};

// One client's E local epochs for the given round: per batch, n_critic
// critic updates (wasserstein term plus gradient penalty) then one
// generator update (adversarial term plus beta-weighted classification
// loss). The generator is conditioned on the augmented attribute when SKA
// is on; the critic is always conditioned on the plain attribute.
LocalTrainStats local_train(ClientState& state, const Dataset& ds,
                            const FedConfig& config,
                            const EmbeddingTable* embeddings, int round);

struct FederationResult {
  GlobalModel global;
  std::vector<ClientState> clients;
  std::vector<RoundMetrics> metrics;
};

struct ExecOptions {
  bool parallel_clients = false;
};

// T rounds of select -> local train -> aggregate -> broadcast. Unseen
// evaluation runs on the post-aggregation server generator every
// config.eval_every rounds. Identical configs give bit-identical results
// with parallelism on or off.
FederationResult run_federation(const Dataset& ds,
                                const std::vector<ClientPartition>& partitions,
                                const FedConfig& config,
                                const EmbeddingTable* embeddings,
                                ExecOptions exec = {});

const char* aggregation_mode_name(AggregationMode mode);
std::optional<AggregationMode> aggregation_mode_from(const std::string& name);

}  // namespace fzsl
