#include "fzsl/config.hpp"

#include <unordered_set>

#include "fzsl/errors.hpp"
#include "fzsl/textio.hpp"

namespace fzsl {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

FedConfig parse_config_text(const std::string& body,
                            const std::string& path_for_errors) {
  FedConfig cfg;
  std::unordered_set<std::string> seen_keys;
  int line_no = 0;
  size_t start = 0;
  while (start <= body.size()) {
    size_t pos = body.find('\n', start);
    std::string_view line;
    if (pos == std::string::npos) {
      if (start >= body.size()) break;
      line = std::string_view(body).substr(start);
      start = body.size() + 1;
    } else {
      line = std::string_view(body).substr(start, pos - start);
      start = pos + 1;
    }
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(path_for_errors, line_no, "expected key = value");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty() || value.empty())
      throw ParseError(path_for_errors, line_no, "expected key = value");
    if (!seen_keys.insert(key).second)
      throw ParseError(path_for_errors, line_no, "duplicate key '" + key + "'");

    auto bad_value = [&]() {
      return ParseError(path_for_errors, line_no,
                        "bad value '" + value + "' for key '" + key + "'");
    };
    auto as_int = [&]() {
      int v = 0;
      if (!parse_int(value, v)) throw bad_value();
      return v;
    };
    auto as_float = [&]() {
      float v = 0;
      if (!parse_float(value, v)) throw bad_value();
      return v;
    };
    auto as_bool = [&]() {
      if (value == "true" || value == "on") return true;
      if (value == "false" || value == "off") return false;
      throw bad_value();
    };

    if (key == "num_clients") cfg.num_clients = as_int();
    else if (key == "client_fraction") cfg.client_fraction = as_float();
    else if (key == "local_epochs") cfg.local_epochs = as_int();
    else if (key == "rounds") cfg.rounds = as_int();
    else if (key == "beta") cfg.beta = as_float();
    else if (key == "cls_pretrain_epochs") cfg.cls_pretrain_epochs = as_int();
    else if (key == "cls_learning_rate") cfg.cls_learning_rate = as_float();
    else if (key == "batch_size") cfg.batch_size = as_int();
    else if (key == "learning_rate") cfg.learning_rate = as_float();
    else if (key == "n_critic") cfg.n_critic = as_int();
    else if (key == "gp_lambda") cfg.gp_lambda = as_float();
    else if (key == "aggregation_mode") {
      auto mode = aggregation_mode_from(value);
      if (!mode) throw bad_value();
      cfg.aggregation_mode = *mode;
    } else if (key == "partition_mode") {
      if (value == "even") cfg.uneven_partition = false;
      else if (value == "uneven") cfg.uneven_partition = true;
      else throw bad_value();
    } else if (key == "ska_enabled") cfg.ska.enabled = as_bool();
    else if (key == "ska_gamma") cfg.ska.gamma = as_float();
    else if (key == "ska_resample_per_draw")
      cfg.ska.resample_per_draw = as_bool();
    else if (key == "synth_per_class") cfg.synth_per_class = as_int();
    else if (key == "global_seed") {
      uint64_t v = 0;
      if (!parse_u64(value, v)) throw bad_value();
      cfg.global_seed = v;
    } else if (key == "hidden_dim") cfg.hidden_dim = as_int();
    else if (key == "noise_dim") cfg.noise_dim = as_int();
    else if (key == "eval_every") cfg.eval_every = as_int();
    else if (key == "eval_epochs") cfg.eval_epochs = as_int();
    else if (key == "eval_learning_rate") cfg.eval_learning_rate = as_float();
    else
      throw ParseError(path_for_errors, line_no, "unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

FedConfig load_config_file(const std::string& path) {
  return parse_config_text(read_text_file(path), path);
}

std::string serialize_config(const FedConfig& c) {
  std::string out;
  auto line = [&out](const std::string& k, const std::string& v) {
    out += k + " = " + v + "\n";
  };
  line("num_clients", std::to_string(c.num_clients));
  line("client_fraction", format_float(c.client_fraction));
  line("local_epochs", std::to_string(c.local_epochs));
  line("rounds", std::to_string(c.rounds));
  line("beta", format_float(c.beta));
  line("cls_pretrain_epochs", std::to_string(c.cls_pretrain_epochs));
  line("cls_learning_rate", format_float(c.cls_learning_rate));
  line("batch_size", std::to_string(c.batch_size));
  line("learning_rate", format_float(c.learning_rate));
  line("n_critic", std::to_string(c.n_critic));
  line("gp_lambda", format_float(c.gp_lambda));
  line("aggregation_mode", aggregation_mode_name(c.aggregation_mode));
  line("partition_mode", c.uneven_partition ? "uneven" : "even");
  line("ska_enabled", c.ska.enabled ? "true" : "false");
  line("ska_gamma", format_float(c.ska.gamma));
  line("ska_resample_per_draw", c.ska.resample_per_draw ? "true" : "false");
  line("synth_per_class", std::to_string(c.synth_per_class));
  line("global_seed", std::to_string(c.global_seed));
  line("hidden_dim", std::to_string(c.hidden_dim));
  line("noise_dim", std::to_string(c.noise_dim));
  line("eval_every", std::to_string(c.eval_every));
  line("eval_epochs", std::to_string(c.eval_epochs));
  line("eval_learning_rate", format_float(c.eval_learning_rate));
  return out;
}

uint64_t config_digest(const FedConfig& config) {
  std::string s = serialize_config(config);
  return fnv1a64(s.data(), s.size());
}

}  // namespace fzsl
