#include "fzsl/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "fzsl/checkpoint.hpp"
#include "fzsl/config.hpp"
#include "fzsl/errors.hpp"
#include "fzsl/textio.hpp"
#include "fzsl/zsl_eval.hpp"

namespace fs = std::filesystem;

namespace fzsl {

std::string features_path(const std::string& dir) {
  return (fs::path(dir) / "features.txt").string();
}
std::string attributes_path(const std::string& dir) {
  return (fs::path(dir) / "attributes.txt").string();
}
std::string split_path(const std::string& dir) {
  return (fs::path(dir) / "split.txt").string();
}
std::string embeddings_default_path(const std::string& dir) {
  return (fs::path(dir) / "embeddings.txt").string();
}

namespace {

Dataset load_data_dir(const std::string& dir) {
  return load_dataset(features_path(dir), attributes_path(dir),
                      split_path(dir));
}

std::vector<ClientPartition> make_partitions(const Dataset& ds,
                                             const FedConfig& cfg) {
  RngStream rng = derive_rng(cfg.global_seed, 0, kServerId, "partition");
  return cfg.uneven_partition ? partition_uneven(ds, cfg.num_clients, rng)
                              : partition_even(ds, cfg.num_clients, rng);
}

std::optional<EmbeddingTable> maybe_load_embeddings(const std::string& path,
                                                    const FedConfig& cfg,
                                                    const std::string& dir) {
  std::string p = path;
  if (p.empty() && cfg.ska.enabled) {
    p = embeddings_default_path(dir);
    if (!fs::exists(p))
      throw std::invalid_argument(
          "ska is enabled but no embeddings file was given and " + p +
          " does not exist");
  }
  if (p.empty()) return std::nullopt;
  return load_embedding_table(p);
}

std::string metrics_extension(const std::string& format) {
  if (format == "jsonl") return ".jsonl";
  if (format == "text") return ".txt";
  throw std::invalid_argument("unknown metrics format '" + format +
                              "' (expected text or jsonl)");
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string render_eval_report(const Dataset& ds, const EvalReport& report,
                               uint64_t cfg_digest,
                               const std::string& format) {
  std::string out;
  if (format == "jsonl") {
    out += "{\"format\":\"fzsl.report\",\"version\":1,\"config_digest\":\"" +
           digest_hex(cfg_digest) + "\"}\n";
    out += "{\"mean_top1\":" + format_float(static_cast<float>(report.top1)) +
           ",\"generator_digest\":\"" + digest_hex(report.generator_digest) +
           "\",\"per_class\":[";
    for (size_t i = 0; i < report.per_class.size(); ++i)
      out += (i ? "," : "") +
             format_float(static_cast<float>(report.per_class[i]));
    out += "],\"classes\":[";
    for (size_t i = 0; i < ds.unseen_classes.size(); ++i)
      out += (i ? "," : "") + std::string("\"") +
             json_escape(
                 ds.class_names[static_cast<size_t>(ds.unseen_classes[i])]) +
             "\"";
    out += "]}\n";
    return out;
  }
  out += "fzsl.report v1 config=" + digest_hex(cfg_digest) + "\n";
  for (size_t i = 0; i < report.per_class.size(); ++i) {
    int cls = ds.unseen_classes[i];
    out += "class=" + ds.class_names[static_cast<size_t>(cls)] +
           " top1=" + format_float(static_cast<float>(report.per_class[i])) +
           "\n";
  }
  out += "mean_top1=" + format_float(static_cast<float>(report.top1)) +
         " generator_digest=" + digest_hex(report.generator_digest) + "\n";
  return out;
}

}  // namespace

std::string render_metrics(const std::vector<RoundMetrics>& metrics,
                           uint64_t config_digest_value,
                           const std::string& format) {
  std::string out;
  if (format == "jsonl") {
    out += "{\"format\":\"fzsl.metrics\",\"version\":1,\"config_digest\":\"" +
           digest_hex(config_digest_value) + "\"}\n";
    for (const RoundMetrics& m : metrics) {
      out += "{\"round\":" + std::to_string(m.round) + ",\"selected\":[";
      for (size_t i = 0; i < m.selected_clients.size(); ++i)
        out += (i ? "," : "") + std::to_string(m.selected_clients[i]);
      out += "],\"critic_loss\":" + format_float(m.mean_critic_loss) +
             ",\"generator_loss\":" + format_float(m.mean_generator_loss) +
             ",\"cls_loss\":" + format_float(m.mean_cls_loss) +
             ",\"uploaded_params\":" + std::to_string(m.uploaded_params) +
             ",\"downloaded_params\":" + std::to_string(m.downloaded_params);
      if (m.unseen_top1)
        out += ",\"unseen_top1\":" + format_float(*m.unseen_top1);
      out += "}\n";
    }
    return out;
  }
  if (format != "text")
    throw std::invalid_argument("unknown metrics format '" + format + "'");
  out += "fzsl.metrics v1 config=" + digest_hex(config_digest_value) + "\n";
  for (const RoundMetrics& m : metrics) {
    out += "round=" + std::to_string(m.round) + " selected=";
    for (size_t i = 0; i < m.selected_clients.size(); ++i)
      out += (i ? "|" : "") + std::to_string(m.selected_clients[i]);
    out += " critic_loss=" + format_float(m.mean_critic_loss) +
           " generator_loss=" + format_float(m.mean_generator_loss) +
           " cls_loss=" + format_float(m.mean_cls_loss) +
           " uploaded_params=" + std::to_string(m.uploaded_params) +
           " downloaded_params=" + std::to_string(m.downloaded_params);
    if (m.unseen_top1) out += " unseen_top1=" + format_float(*m.unseen_top1);
    out += "\n";
  }
  return out;
}

int cmd_gen_data(const GenDataArgs& args) {
  args.spec.validate();
  if (args.out_dir.empty())
    throw std::invalid_argument("gen-data: output directory required");
  fs::create_directories(args.out_dir);
  RngStream rng = derive_rng(args.seed, 0, kServerId, "gen-data");
  SyntheticDataset synth = make_synthetic(args.spec, rng);
  save_dataset(synth.dataset, features_path(args.out_dir),
               attributes_path(args.out_dir), split_path(args.out_dir));
  if (args.embed_dim > 0) {
    EmbeddingTable table = make_pseudo_embedding_table(
        synth.dataset.class_names, args.embed_dim, args.seed);
    save_embedding_table(table, embeddings_default_path(args.out_dir));
  }
  std::cout << "wrote dataset with " << synth.dataset.num_rows() << " rows, "
            << synth.dataset.seen_classes.size() << " seen / "
            << synth.dataset.unseen_classes.size() << " unseen classes to "
            << args.out_dir << "\n";
  return 0;
}

int cmd_train(const TrainArgs& args) {
  FedConfig cfg = load_config_file(args.config_path);
  if (args.seed_override) cfg.global_seed = *args.seed_override;
  metrics_extension(args.metrics_format);  // validate early

  Dataset ds = load_data_dir(args.data_dir);
  std::optional<EmbeddingTable> embeddings =
      maybe_load_embeddings(args.embeddings_path, cfg, args.data_dir);
  std::vector<ClientPartition> partitions = make_partitions(ds, cfg);

  FederationResult result =
      run_federation(ds, partitions, cfg,
                     embeddings ? &*embeddings : nullptr,
                     ExecOptions{args.parallel});

  fs::create_directories(args.out_dir);
  uint64_t digest = config_digest(cfg);
  std::string metrics_file =
      (fs::path(args.out_dir) /
       ("metrics" + metrics_extension(args.metrics_format)))
          .string();
  write_text_file(metrics_file,
                  render_metrics(result.metrics, digest, args.metrics_format));

  Checkpoint ckpt;
  ckpt.round = cfg.rounds;
  ckpt.config = cfg;
  ckpt.feature_dim = ds.feature_dim();
  ckpt.attr_dim = ds.attr_dim();
  ckpt.embed_dim = cfg.ska.enabled ? embeddings->embed_dim() : 0;
  ckpt.cond_dim = cfg.ska.enabled ? embeddings->embed_dim() + ds.attr_dim()
                                  : ds.attr_dim();
  for (const ClientState& c : result.clients) ckpt.clients.push_back(c.model);
  ckpt.global.generator = result.global.generator;
  ckpt.global.discriminator = result.global.discriminator
                                  ? *result.global.discriminator
                                  : result.clients.front().model.discriminator;
  // In generator-only mode the server critic is never updated; store the
  // aggregate-side generator with the initial critic shell for shape info.
  if (!result.global.discriminator) {
    RngStream d_rng = derive_rng(cfg.global_seed, 0, kServerId, "init_d");
    RngStream g_rng = derive_rng(cfg.global_seed, 0, kServerId, "init_g");
    GanModel initial =
        gan_init(ds.feature_dim(), ds.attr_dim(), ckpt.cond_dim,
                 result.global.noise_dim, cfg.hidden_dim, g_rng, d_rng);
    ckpt.global.discriminator = initial.discriminator;
  }
  ckpt.global.noise_dim = result.global.noise_dim;
  save_checkpoint((fs::path(args.out_dir) / "checkpoint").string(), ckpt);

  std::cout << "trained " << cfg.rounds << " rounds; metrics in "
            << metrics_file << "\n";
  return 0;
}

int cmd_eval(const EvalArgs& args) {
  Checkpoint ckpt = load_checkpoint(args.checkpoint_stem);
  FedConfig cfg = ckpt.config;
  uint64_t eval_seed =
      args.seed_override ? *args.seed_override : cfg.global_seed;

  Dataset ds = load_data_dir(args.data_dir);
  if (ds.feature_dim() != ckpt.feature_dim || ds.attr_dim() != ckpt.attr_dim)
    throw std::invalid_argument(
        "eval: checkpoint dims do not match the dataset (features " +
        std::to_string(ckpt.feature_dim) + " vs " +
        std::to_string(ds.feature_dim()) + ", attributes " +
        std::to_string(ckpt.attr_dim) + " vs " +
        std::to_string(ds.attr_dim()) + ")");
  std::optional<EmbeddingTable> embeddings =
      maybe_load_embeddings(args.embeddings_path, cfg, args.data_dir);
  if (cfg.ska.enabled && embeddings->embed_dim() != ckpt.embed_dim)
    throw std::invalid_argument("eval: embedding width mismatch");

  EvalConfig ec;
  ec.per_class = cfg.synth_per_class;
  ec.ska = cfg.ska;
  ec.epochs = cfg.eval_epochs;
  ec.learning_rate = cfg.eval_learning_rate;
  RngStream rng = derive_rng(eval_seed, 0, kServerId, "eval");
  EvalReport report = evaluate_unseen(
      ckpt.global.generator, ds, embeddings ? &*embeddings : nullptr, ec, rng);

  std::string body =
      render_eval_report(ds, report, config_digest(cfg), args.metrics_format);
  std::cout << body;
  std::string out_path = args.out_path;
  if (out_path.empty())
    out_path = args.checkpoint_stem + ".report" +
               metrics_extension(args.metrics_format);
  write_text_file(out_path, body);
  return 0;
}

namespace {

enum class SweepAxis {
  None,
  ClientNumber,
  ClientFraction,
  LocalEpochs,
  AggregationMode,
  SkaMode
};

struct SweepPlan {
  FedConfig base;
  SweepAxis axis = SweepAxis::None;
  std::vector<std::string> values;
  int repeats = 1;
};

SweepPlan parse_plan(const std::string& path) {
  SweepPlan plan;
  std::string body = read_text_file(path);
  std::string config_text;
  int line_no = 0;
  size_t start = 0;
  while (start < body.size()) {
    size_t pos = body.find('\n', start);
    if (pos == std::string::npos) pos = body.size();
    std::string line = body.substr(start, pos - start);
    start = pos + 1;
    ++line_no;
    std::string stripped = line;
    stripped.erase(0, stripped.find_first_not_of(" \t"));
    if (stripped.rfind("sweep_axis", 0) == 0 ||
        stripped.rfind("sweep_values", 0) == 0 ||
        stripped.rfind("repeats", 0) == 0) {
      size_t eq = stripped.find('=');
      if (eq == std::string::npos)
        throw ParseError(path, line_no, "expected key = value");
      std::string key = stripped.substr(0, eq);
      key.erase(key.find_last_not_of(" \t") + 1);
      std::string value = stripped.substr(eq + 1);
      value.erase(0, value.find_first_not_of(" \t"));
      value.erase(value.find_last_not_of(" \t\r") + 1);
      if (key == "sweep_axis") {
        if (value == "none") plan.axis = SweepAxis::None;
        else if (value == "client_number") plan.axis = SweepAxis::ClientNumber;
        else if (value == "client_fraction")
          plan.axis = SweepAxis::ClientFraction;
        else if (value == "local_epochs") plan.axis = SweepAxis::LocalEpochs;
        else if (value == "aggregation_mode")
          plan.axis = SweepAxis::AggregationMode;
        else if (value == "ska_mode") plan.axis = SweepAxis::SkaMode;
        else throw ParseError(path, line_no, "unknown sweep axis '" + value + "'");
      } else if (key == "sweep_values") {
        for (auto tok : split(value, ','))
          plan.values.emplace_back(tok);
        if (plan.values.empty())
          throw ParseError(path, line_no, "empty sweep_values");
      } else {
        if (!parse_int(value, plan.repeats) || plan.repeats <= 0)
          throw ParseError(path, line_no, "repeats must be a positive integer");
      }
    } else {
      config_text += line + "\n";
    }
  }
  plan.base = parse_config_text(config_text, path);
  if (plan.axis == SweepAxis::None && plan.values.empty())
    plan.values.push_back("-");
  if (plan.axis != SweepAxis::None && plan.values.empty())
    throw ParseError(path, 1, "sweep_values required for the chosen axis");
  return plan;
}

FedConfig apply_axis(const SweepPlan& plan, const std::string& value,
                     const std::string& path) {
  FedConfig cfg = plan.base;
  auto bad = [&]() {
    return std::invalid_argument("sweep: bad value '" + value +
                                 "' for the chosen axis in " + path);
  };
  switch (plan.axis) {
    case SweepAxis::None:
      break;
    case SweepAxis::ClientNumber: {
      int v = 0;
      if (!parse_int(value, v) || v <= 0) throw bad();
      cfg.num_clients = v;
      break;
    }
    case SweepAxis::ClientFraction: {
      float v = 0;
      if (!parse_float(value, v) || !(v > 0.0f) || v > 1.0f) throw bad();
      cfg.client_fraction = v;
      break;
    }
    case SweepAxis::LocalEpochs: {
      int v = 0;
      if (!parse_int(value, v) || v <= 0) throw bad();
      cfg.local_epochs = v;
      break;
    }
    case SweepAxis::AggregationMode: {
      auto mode = aggregation_mode_from(value);
      if (!mode) throw bad();
      cfg.aggregation_mode = *mode;
      break;
    }
    case SweepAxis::SkaMode: {
      if (value == "on") cfg.ska.enabled = true;
      else if (value == "off") cfg.ska.enabled = false;
      else throw bad();
      break;
    }
  }
  return cfg;
}

}  // namespace

int cmd_sweep(const SweepArgs& args) {
  SweepPlan plan = parse_plan(args.plan_path);
  Dataset ds = load_data_dir(args.data_dir);
  fs::create_directories(args.out_dir);

  struct CellResult {
    std::string value;
    std::vector<double> top1;
    std::vector<std::string> errors;
  };
  std::vector<CellResult> cells;

  for (const std::string& value : plan.values) {
    CellResult cell;
    cell.value = value;
    for (int rep = 0; rep < plan.repeats; ++rep) {
      try {
        FedConfig cfg = apply_axis(plan, value, args.plan_path);
        cfg.global_seed = plan.base.global_seed + static_cast<uint64_t>(rep);
        std::optional<EmbeddingTable> embeddings =
            maybe_load_embeddings(args.embeddings_path, cfg, args.data_dir);
        std::vector<ClientPartition> partitions = make_partitions(ds, cfg);
        FederationResult result =
            run_federation(ds, partitions, cfg,
                           embeddings ? &*embeddings : nullptr,
                           ExecOptions{args.parallel});

        EvalConfig ec;
        ec.per_class = cfg.synth_per_class;
        ec.ska = cfg.ska;
        ec.epochs = cfg.eval_epochs;
        ec.learning_rate = cfg.eval_learning_rate;
        RngStream rng = derive_rng(cfg.global_seed, 0, kServerId, "eval");
        EvalReport report =
            evaluate_unseen(result.global.generator, ds,
                            embeddings ? &*embeddings : nullptr, ec, rng);
        cell.top1.push_back(report.top1);

        std::string cell_dir =
            (fs::path(args.out_dir) /
             ("cell_" + (value == "-" ? std::string("base") : value) + "_rep" +
              std::to_string(rep)))
                .string();
        fs::create_directories(cell_dir);
        write_text_file(
            (fs::path(cell_dir) /
             ("metrics" + metrics_extension(args.metrics_format)))
                .string(),
            render_metrics(result.metrics, config_digest(cfg),
                           args.metrics_format));
        write_text_file((fs::path(cell_dir) / "report.txt").string(),
                        render_eval_report(ds, report, config_digest(cfg),
                                           "text"));
      } catch (const std::exception& e) {
        cell.errors.push_back("rep " + std::to_string(rep) + ": " + e.what());
      }
    }
    cells.push_back(std::move(cell));
  }

  std::string summary = "fzsl.sweep v1 config=" +
                        digest_hex(config_digest(plan.base)) + "\n";
  bool any_failed = false;
  for (const CellResult& cell : cells) {
    double mean = 0.0, sd = 0.0;
    for (double v : cell.top1) mean += v;
    if (!cell.top1.empty()) mean /= static_cast<double>(cell.top1.size());
    for (double v : cell.top1) sd += (v - mean) * (v - mean);
    sd = cell.top1.size() > 1
             ? std::sqrt(sd / static_cast<double>(cell.top1.size() - 1))
             : 0.0;
    summary += "value=" + cell.value +
               " mean_top1=" + format_float(static_cast<float>(mean)) +
               " std=" + format_float(static_cast<float>(sd)) +
               " repeats=" + std::to_string(cell.top1.size());
    if (!cell.errors.empty()) {
      any_failed = true;
      summary += " failed=" + std::to_string(cell.errors.size());
    }
    summary += "\n";
    for (const std::string& err : cell.errors)
      summary += "# error value=" + cell.value + " " + err + "\n";
  }
  write_text_file((fs::path(args.out_dir) / "summary.txt").string(), summary);
  std::cout << summary;
  return any_failed ? 1 : 0;
}

int cmd_attack(const AttackArgs& args) {
  if (args.target != "mid" && args.target != "high" && args.target != "both")
    throw std::invalid_argument("attack: target must be mid, high or both");
  std::string args_echo =
      "feature_dim=" + std::to_string(args.feature_dim) +
      " attr_dim=" + std::to_string(args.attr_dim) +
      " num_classes=" + std::to_string(args.num_classes) +
      " hidden_dim=" + std::to_string(args.hidden_dim) +
      " steps=" + std::to_string(args.steps) +
      " seed=" + std::to_string(args.seed) + " target=" + args.target;
  std::string body =
      "fzsl.attack v1 config=" +
      digest_hex(fnv1a64(args_echo.data(), args_echo.size())) + "\n";

  auto append_report = [&body](const LeakageReport& r) {
    body += std::string("kind=") +
            (r.kind == TargetKind::FeatureAndAttribute
                 ? "feature_and_attribute"
                 : "feature_and_label") +
            " feature_cosine=" + format_float(r.feature_cosine) +
            " condition_cosine=" + format_float(r.condition_cosine) +
            " initial_residual=" + format_float(r.initial_residual) +
            " final_residual=" + format_float(r.final_residual) +
            " steps=" + std::to_string(r.iterations) + "\n";
  };

  if (args.target == "mid" || args.target == "both") {
    LeakageDemoSpec spec;
    spec.kind = TargetKind::FeatureAndAttribute;
    spec.feature_dim = args.feature_dim;
    spec.cond_dim = args.attr_dim;
    spec.hidden_dim = args.hidden_dim;
    spec.steps = args.steps;
    spec.seed = args.seed;
    append_report(run_leakage_demo(spec));
  }
  if (args.target == "high" || args.target == "both") {
    LeakageDemoSpec spec;
    spec.kind = TargetKind::FeatureAndLabel;
    spec.feature_dim = args.feature_dim;
    spec.cond_dim = args.num_classes;
    spec.hidden_dim = args.hidden_dim;
    spec.steps = args.steps;
    spec.seed = args.seed;
    append_report(run_leakage_demo(spec));
  }

  std::cout << body;
  if (!args.out_path.empty()) write_text_file(args.out_path, body);
  return 0;
}

int cmd_stats(const StatsArgs& args) {
  Dataset ds = load_data_dir(args.data_dir);
  RngStream rng = derive_rng(args.seed, 0, kServerId, "partition");
  std::vector<ClientPartition> parts =
      args.uneven ? partition_uneven(ds, args.num_clients, rng)
                  : partition_even(ds, args.num_clients, rng);
  validate_partitions(ds, parts);

  std::string args_echo = "num_clients=" + std::to_string(args.num_clients) +
                          " partition_mode=" +
                          (args.uneven ? "uneven" : "even") +
                          " seed=" + std::to_string(args.seed);
  std::string body =
      "fzsl.stats v1 config=" +
      digest_hex(fnv1a64(args_echo.data(), args_echo.size())) + "\n";
  for (const ClientPartition& p : parts) {
    body += "client=" + std::to_string(p.client_id) +
            " classes=" + std::to_string(p.class_subset.size()) +
            " rows=" + std::to_string(p.row_indices.size()) + "\n";
  }
  if (parts.size() >= 2) {
    double skew = partition_skew(parts, ds);
    body += "label_skew=" + format_float(static_cast<float>(skew)) + "\n";
  }
  std::cout << body;
  if (!args.out_path.empty()) write_text_file(args.out_path, body);
  return 0;
}

}  // namespace fzsl
