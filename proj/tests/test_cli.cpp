#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fzsl/checkpoint.hpp"
#include "fzsl/commands.hpp"
#include "fzsl/config.hpp"
#include "fzsl/errors.hpp"
#include "fzsl/textio.hpp"

using namespace fzsl;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "fzsl_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

GenDataArgs tiny_gen_args(const fs::path& out, uint64_t seed = 3) {
  GenDataArgs args;
  args.spec.seen_count = 6;
  args.spec.unseen_count = 2;
  args.spec.attr_dim = 4;
  args.spec.feature_dim = 6;
  args.spec.rows_per_class = 8;
  args.seed = seed;
  args.embed_dim = 8;
  args.out_dir = out.string();
  return args;
}

std::string tiny_config_text(int rounds, const std::string& mode) {
  return "num_clients = 2\nrounds = " + std::to_string(rounds) +
         "\nbatch_size = 8\nhidden_dim = 8\nn_critic = 2\n"
         "cls_pretrain_epochs = 20\nsynth_per_class = 10\n"
         "eval_epochs = 20\naggregation_mode = " + mode + "\n"
         "global_seed = 5\n";
}

}  // namespace

TEST_CASE("config parser rejects unknown keys, duplicates and bad values") {
  CHECK_THROWS_AS(parse_config_text("rounds = 3\nturbo = yes\n", "cfg"),
                  ParseError);
  CHECK_THROWS_AS(parse_config_text("rounds = 3\nrounds = 4\n", "cfg"),
                  ParseError);
  try {
    parse_config_text("rounds = 3\nbeta = fast\n", "cfg");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    std::string msg = e.what();
    CHECK(msg.find("cfg:2") != std::string::npos);
    CHECK(msg.find("beta") != std::string::npos);
  }
  // comments and blank lines are fine
  FedConfig cfg = parse_config_text("# comment\n\nrounds = 7\n", "cfg");
  CHECK(cfg.rounds == 7);
}

TEST_CASE("config serialization round-trips and digests are stable") {
  FedConfig cfg;
  cfg.rounds = 13;
  cfg.client_fraction = 0.25f;
  cfg.ska.enabled = true;
  cfg.ska.gamma = 0.37f;
  cfg.aggregation_mode = AggregationMode::Holistic;
  FedConfig back = parse_config_text(serialize_config(cfg), "echo");
  CHECK(serialize_config(back) == serialize_config(cfg));
  CHECK(config_digest(back) == config_digest(cfg));
  cfg.rounds = 14;
  CHECK(config_digest(back) != config_digest(cfg));
}

TEST_CASE("gen-data writes a loadable dataset and is byte-stable in the seed") {
  auto dir = temp_dir("gen");
  CHECK(cmd_gen_data(tiny_gen_args(dir / "a", 7)) == 0);
  Dataset ds = load_dataset(features_path((dir / "a").string()),
                            attributes_path((dir / "a").string()),
                            split_path((dir / "a").string()));
  CHECK(ds.num_rows() == 64);
  CHECK(ds.seen_classes.size() == 6);

  CHECK(cmd_gen_data(tiny_gen_args(dir / "b", 7)) == 0);
  for (const char* name : {"features.txt", "attributes.txt", "split.txt",
                           "embeddings.txt"}) {
    std::string a = read_text_file((dir / "a" / name).string());
    std::string b = read_text_file((dir / "b" / name).string());
    CHECK(a == b);
  }
}

TEST_CASE("gen-data refuses a dataset without unseen classes") {
  auto dir = temp_dir("gen0");
  GenDataArgs args = tiny_gen_args(dir);
  args.spec.unseen_count = 0;
  CHECK_THROWS_AS(cmd_gen_data(args), std::invalid_argument);
}

TEST_CASE("train writes metrics and a checkpoint; reruns are byte-identical") {
  auto dir = temp_dir("train");
  REQUIRE(cmd_gen_data(tiny_gen_args(dir / "data")) == 0);
  std::ofstream(dir / "cfg.txt") << tiny_config_text(2, "generator_only");

  TrainArgs t;
  t.config_path = (dir / "cfg.txt").string();
  t.data_dir = (dir / "data").string();
  t.out_dir = (dir / "run1").string();
  REQUIRE(cmd_train(t) == 0);
  t.out_dir = (dir / "run2").string();
  t.parallel = true;
  REQUIRE(cmd_train(t) == 0);

  CHECK(read_text_file((dir / "run1" / "metrics.txt").string()) ==
        read_text_file((dir / "run2" / "metrics.txt").string()));
  CHECK(read_text_file((dir / "run1" / "checkpoint.meta").string()) ==
        read_text_file((dir / "run2" / "checkpoint.meta").string()));
  // binary blobs as well
  std::ifstream b1((dir / "run1" / "checkpoint.bin").string(),
                   std::ios::binary);
  std::ifstream b2((dir / "run2" / "checkpoint.bin").string(),
                   std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(b1)),
                 std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(b2)),
                 std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
}

TEST_CASE("train with zero rounds checkpoints the initial model and an empty "
          "metrics body") {
  auto dir = temp_dir("train0");
  REQUIRE(cmd_gen_data(tiny_gen_args(dir / "data")) == 0);
  std::ofstream(dir / "cfg.txt") << tiny_config_text(0, "generator_only");
  TrainArgs t;
  t.config_path = (dir / "cfg.txt").string();
  t.data_dir = (dir / "data").string();
  t.out_dir = (dir / "run").string();
  REQUIRE(cmd_train(t) == 0);
  std::string metrics = read_text_file((dir / "run" / "metrics.txt").string());
  CHECK(metrics.rfind("fzsl.metrics v1 config=", 0) == 0);
  CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 1);
  Checkpoint ckpt = load_checkpoint((dir / "run" / "checkpoint").string());
  CHECK(ckpt.round == 0);
  CHECK(ckpt.clients.size() == 2);
}

TEST_CASE("both aggregation modes produce parseable metrics") {
  auto dir = temp_dir("modes");
  REQUIRE(cmd_gen_data(tiny_gen_args(dir / "data")) == 0);
  for (const std::string mode : {"generator_only", "holistic"}) {
    std::ofstream(dir / "cfg.txt") << tiny_config_text(1, mode);
    TrainArgs t;
    t.config_path = (dir / "cfg.txt").string();
    t.data_dir = (dir / "data").string();
    t.out_dir = (dir / ("run_" + mode)).string();
    t.metrics_format = "jsonl";
    REQUIRE(cmd_train(t) == 0);
    std::string metrics =
        read_text_file((dir / ("run_" + mode) / "metrics.jsonl").string());
    CHECK(metrics.find("\"round\":1") != std::string::npos);
    CHECK(metrics.find("uploaded_params") != std::string::npos);
  }
}

TEST_CASE("eval reports per-class accuracies and refuses tampered blobs") {
  auto dir = temp_dir("eval");
  REQUIRE(cmd_gen_data(tiny_gen_args(dir / "data")) == 0);
  std::ofstream(dir / "cfg.txt") << tiny_config_text(1, "generator_only");
  TrainArgs t;
  t.config_path = (dir / "cfg.txt").string();
  t.data_dir = (dir / "data").string();
  t.out_dir = (dir / "run").string();
  REQUIRE(cmd_train(t) == 0);

  EvalArgs e;
  e.checkpoint_stem = (dir / "run" / "checkpoint").string();
  e.data_dir = (dir / "data").string();
  e.out_path = (dir / "report.txt").string();
  REQUIRE(cmd_eval(e) == 0);
  std::string report = read_text_file(e.out_path);
  CHECK(report.rfind("fzsl.report v1 config=", 0) == 0);
  CHECK(std::count(report.begin(), report.end(), '\n') == 4);  // header+2+mean
  CHECK(report.find("mean_top1=") != std::string::npos);

  // identical bytes on rerun with the same seed
  e.out_path = (dir / "report2.txt").string();
  REQUIRE(cmd_eval(e) == 0);
  CHECK(read_text_file(e.out_path) == report);

  // flip one byte in the blob
  {
    std::fstream blob((dir / "run" / "checkpoint.bin").string(),
                      std::ios::binary | std::ios::in | std::ios::out);
    blob.seekp(10);
    char c;
    blob.seekg(10);
    blob.get(c);
    c = static_cast<char>(c ^ 0x40);
    blob.seekp(10);
    blob.put(c);
  }
  try {
    cmd_eval(e);
    FAIL("expected ParseError");
  } catch (const ParseError& ex) {
    CHECK(std::string(ex.what()).find("digest mismatch") != std::string::npos);
  }
}

TEST_CASE("sweep over the client number emits one summary row per value") {
  auto dir = temp_dir("sweep");
  REQUIRE(cmd_gen_data(tiny_gen_args(dir / "data")) == 0);
  std::ofstream(dir / "plan.txt")
      << tiny_config_text(1, "generator_only")
      << "sweep_axis = client_number\nsweep_values = 1,2,3\nrepeats = 2\n";
  SweepArgs s;
  s.plan_path = (dir / "plan.txt").string();
  s.data_dir = (dir / "data").string();
  s.out_dir = (dir / "out").string();
  REQUIRE(cmd_sweep(s) == 0);
  std::string summary = read_text_file((dir / "out" / "summary.txt").string());
  CHECK(summary.find("value=1 ") != std::string::npos);
  CHECK(summary.find("value=2 ") != std::string::npos);
  CHECK(summary.find("value=3 ") != std::string::npos);
  CHECK(summary.find("repeats=2") != std::string::npos);
  CHECK(summary.find("std=") != std::string::npos);
}

TEST_CASE("sweep with no axis runs exactly one cell") {
  auto dir = temp_dir("sweep_none");
  REQUIRE(cmd_gen_data(tiny_gen_args(dir / "data")) == 0);
  std::ofstream(dir / "plan.txt")
      << tiny_config_text(1, "generator_only") << "repeats = 1\n";
  SweepArgs s;
  s.plan_path = (dir / "plan.txt").string();
  s.data_dir = (dir / "data").string();
  s.out_dir = (dir / "out").string();
  REQUIRE(cmd_sweep(s) == 0);
  std::string summary = read_text_file((dir / "out" / "summary.txt").string());
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 2);  // header + 1
}

TEST_CASE("a failing sweep cell is recorded and flips the exit code") {
  auto dir = temp_dir("sweep_fail");
  REQUIRE(cmd_gen_data(tiny_gen_args(dir / "data")) == 0);
  // 7 clients cannot split 6 seen classes
  std::ofstream(dir / "plan.txt")
      << tiny_config_text(1, "generator_only")
      << "sweep_axis = client_number\nsweep_values = 2,7\nrepeats = 1\n";
  SweepArgs s;
  s.plan_path = (dir / "plan.txt").string();
  s.data_dir = (dir / "data").string();
  s.out_dir = (dir / "out").string();
  CHECK(cmd_sweep(s) == 1);
  std::string summary = read_text_file((dir / "out" / "summary.txt").string());
  CHECK(summary.find("failed=1") != std::string::npos);
  CHECK(summary.find("value=2 ") != std::string::npos);
}

TEST_CASE("attack command writes reports with cosine fields") {
  auto dir = temp_dir("attack");
  AttackArgs a;
  a.steps = 100;
  a.seed = 4;
  a.out_path = (dir / "report.txt").string();
  REQUIRE(cmd_attack(a) == 0);
  std::string report = read_text_file(a.out_path);
  CHECK(report.rfind("fzsl.attack v1 config=", 0) == 0);
  CHECK(report.find("kind=feature_and_attribute") != std::string::npos);
  CHECK(report.find("kind=feature_and_label") != std::string::npos);
  CHECK(report.find("condition_cosine=") != std::string::npos);

  a.out_path = (dir / "report2.txt").string();
  REQUIRE(cmd_attack(a) == 0);
  CHECK(read_text_file(a.out_path) == report);

  AttackArgs zero = a;
  zero.steps = 0;
  zero.out_path = (dir / "baseline.txt").string();
  REQUIRE(cmd_attack(zero) == 0);
  CHECK(read_text_file(zero.out_path).find("steps=0") != std::string::npos);
}

TEST_CASE("stats reports the disjoint-partition skew of exactly 1") {
  auto dir = temp_dir("stats");
  REQUIRE(cmd_gen_data(tiny_gen_args(dir / "data")) == 0);
  StatsArgs s;
  s.data_dir = (dir / "data").string();
  s.num_clients = 3;
  s.out_path = (dir / "stats.txt").string();
  REQUIRE(cmd_stats(s) == 0);
  std::string report = read_text_file(s.out_path);
  CHECK(report.find("label_skew=1\n") != std::string::npos);
  CHECK(report.find("client=2") != std::string::npos);
}
