#pragma once

#include <optional>
#include <string>

#include "fzsl/attack.hpp"
#include "fzsl/dataset.hpp"
#include "fzsl/fedcore.hpp"

namespace fzsl {

// Subcommand entry points. Each throws on invalid input and returns a
// process exit code otherwise; the CLI wrapper turns exceptions into
// non-zero exits. All outputs are reproducible byte-for-byte from
// (flags, config, seed).

struct GenDataArgs {
  SyntheticSpec spec;
  uint64_t seed = 0;
  std::string out_dir;
  int embed_dim = 0;  // also write a pseudo-embedding table when > 0
};
int cmd_gen_data(const GenDataArgs& args);

struct TrainArgs {
  std::string config_path;
  std::string data_dir;
  std::string out_dir;
  std::string embeddings_path;  // optional unless SKA is on
  std::optional<uint64_t> seed_override;
  std::string metrics_format = "text";  // text | jsonl
  bool parallel = false;
};
int cmd_train(const TrainArgs& args);

struct EvalArgs {
  std::string checkpoint_stem;
  std::string data_dir;
  std::string embeddings_path;
  std::string out_path;  // default <stem>.report.<ext>
  std::optional<uint64_t> seed_override;
  std::string metrics_format = "text";
};
int cmd_eval(const EvalArgs& args);

struct SweepArgs {
  std::string plan_path;
  std::string data_dir;
  std::string out_dir;
  std::string embeddings_path;
  std::string metrics_format = "text";
  bool parallel = false;
};
int cmd_sweep(const SweepArgs& args);

struct AttackArgs {
  int feature_dim = 16;
  int attr_dim = 8;
  int num_classes = 8;  // high-level head width
  int hidden_dim = 32;
  int steps = 2000;
  uint64_t seed = 0;
  std::string target = "both";  // mid | high | both
  std::string out_path;
};
int cmd_attack(const AttackArgs& args);

struct StatsArgs {
  std::string data_dir;
  int num_clients = 4;
  bool uneven = false;
  uint64_t seed = 0;
  std::string out_path;
};
int cmd_stats(const StatsArgs& args);

// Dataset file names inside a data directory.
std::string features_path(const std::string& dir);
std::string attributes_path(const std::string& dir);
std::string split_path(const std::string& dir);
std::string embeddings_default_path(const std::string& dir);

// Serialized metrics lines (shared by train and sweep).
std::string render_metrics(const std::vector<RoundMetrics>& metrics,
                           uint64_t config_digest_value,
                           const std::string& format);

}  // namespace fzsl
