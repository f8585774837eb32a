// Command-line front end: gen-data, train, eval, sweep, attack, stats.
#include <CLI11.hpp>
#include <iostream>

#include "fzsl/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Federated zero-shot feature-generation simulator"};
  app.require_subcommand(1);

  fzsl::GenDataArgs gen;
  CLI::App* cmd_gen = app.add_subcommand("gen-data",
                                         "Write a synthetic dataset");
  cmd_gen->add_option("--seen", gen.spec.seen_count, "Seen class count");
  cmd_gen->add_option("--unseen", gen.spec.unseen_count, "Unseen class count");
  cmd_gen->add_option("--attr-dim", gen.spec.attr_dim, "Attribute width");
  cmd_gen->add_option("--feature-dim", gen.spec.feature_dim, "Feature width");
  cmd_gen->add_option("--rows-per-class", gen.spec.rows_per_class,
                      "Rows per class");
  cmd_gen->add_option("--noise-scale", gen.spec.noise_scale,
                      "Feature noise standard deviation");
  cmd_gen->add_option("--embed-dim", gen.embed_dim,
                      "Also write pseudo text embeddings of this width");
  cmd_gen->add_option("--seed", gen.seed, "Generation seed");
  cmd_gen->add_option("--out", gen.out_dir, "Output directory")->required();

  fzsl::TrainArgs train;
  CLI::App* cmd_tr = app.add_subcommand("train", "Run the federation");
  cmd_tr->add_option("--config", train.config_path, "Config file")->required();
  cmd_tr->add_option("--data", train.data_dir, "Dataset directory")
      ->required();
  cmd_tr->add_option("--out", train.out_dir, "Output directory")->required();
  cmd_tr->add_option("--embeddings", train.embeddings_path,
                     "Embedding table (defaults to <data>/embeddings.txt "
                     "when SKA is on)");
  uint64_t train_seed = 0;
  CLI::Option* train_seed_opt =
      cmd_tr->add_option("--seed", train_seed, "Override the config seed");
  cmd_tr->add_option("--metrics-format", train.metrics_format,
                     "text or jsonl");
  cmd_tr->add_flag("--parallel", train.parallel,
                   "Train selected clients on worker threads");

  fzsl::EvalArgs eval;
  CLI::App* cmd_ev = app.add_subcommand("eval", "Score a checkpoint");
  cmd_ev->add_option("--checkpoint", eval.checkpoint_stem,
                     "Checkpoint stem (without .meta/.bin)")
      ->required();
  cmd_ev->add_option("--data", eval.data_dir, "Dataset directory")->required();
  cmd_ev->add_option("--embeddings", eval.embeddings_path, "Embedding table");
  cmd_ev->add_option("--out", eval.out_path, "Report path");
  uint64_t eval_seed = 0;
  CLI::Option* eval_seed_opt =
      cmd_ev->add_option("--seed", eval_seed, "Evaluation seed");
  cmd_ev->add_option("--metrics-format", eval.metrics_format,
                     "text or jsonl");

  fzsl::SweepArgs sweep;
  CLI::App* cmd_sw = app.add_subcommand("sweep", "Run an experiment sweep");
  cmd_sw->add_option("--plan", sweep.plan_path, "Plan file")->required();
  cmd_sw->add_option("--data", sweep.data_dir, "Dataset directory")
      ->required();
  cmd_sw->add_option("--out", sweep.out_dir, "Output directory")->required();
  cmd_sw->add_option("--embeddings", sweep.embeddings_path, "Embedding table");
  cmd_sw->add_option("--metrics-format", sweep.metrics_format,
                     "text or jsonl");
  cmd_sw->add_flag("--parallel", sweep.parallel,
                   "Train selected clients on worker threads");

  fzsl::AttackArgs attack;
  CLI::App* cmd_at = app.add_subcommand(
      "attack", "Gradient-leakage inversion demo");
  cmd_at->add_option("--feature-dim", attack.feature_dim, "Feature width");
  cmd_at->add_option("--attr-dim", attack.attr_dim, "Attribute width");
  cmd_at->add_option("--classes", attack.num_classes,
                     "Class count for the high-level head");
  cmd_at->add_option("--hidden", attack.hidden_dim, "Critic hidden width");
  cmd_at->add_option("--steps", attack.steps, "Inversion steps");
  cmd_at->add_option("--seed", attack.seed, "Seed");
  cmd_at->add_option("--target", attack.target, "mid, high or both");
  cmd_at->add_option("--out", attack.out_path, "Report path");

  fzsl::StatsArgs stats;
  CLI::App* cmd_st = app.add_subcommand("stats", "Partition skew report");
  cmd_st->add_option("--data", stats.data_dir, "Dataset directory")
      ->required();
  cmd_st->add_option("--clients", stats.num_clients, "Client count");
  cmd_st->add_flag("--uneven", stats.uneven, "Uneven partition");
  cmd_st->add_option("--seed", stats.seed, "Partition seed");
  cmd_st->add_option("--out", stats.out_path, "Report path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_gen->parsed()) return fzsl::cmd_gen_data(gen);
    if (cmd_tr->parsed()) {
      if (!train_seed_opt->empty()) train.seed_override = train_seed;
      return fzsl::cmd_train(train);
    }
    if (cmd_ev->parsed()) {
      if (!eval_seed_opt->empty()) eval.seed_override = eval_seed;
      return fzsl::cmd_eval(eval);
    }
    if (cmd_sw->parsed()) return fzsl::cmd_sweep(sweep);
    if (cmd_at->parsed()) return fzsl::cmd_attack(attack);
    if (cmd_st->parsed()) return fzsl::cmd_stats(stats);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
