#include "fzsl/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fzsl/config.hpp"
#include "fzsl/errors.hpp"
#include "fzsl/textio.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are little-endian");

namespace fzsl {

namespace {

void append_mlp(std::vector<float>& blob, const MlpParams& p) {
  blob.insert(blob.end(), p.w1.data.begin(), p.w1.data.end());
  blob.insert(blob.end(), p.b1.data.begin(), p.b1.data.end());
  blob.insert(blob.end(), p.w2.data.begin(), p.w2.data.end());
  blob.insert(blob.end(), p.b2.data.begin(), p.b2.data.end());
}

void read_mlp(const std::vector<float>& blob, size_t& cursor, MlpParams& p) {
  auto take = [&](Matrix& m) {
    if (cursor + m.data.size() > blob.size())
      throw ParseError("checkpoint blob: truncated");
    std::copy(blob.begin() + static_cast<long>(cursor),
              blob.begin() + static_cast<long>(cursor + m.data.size()),
              m.data.begin());
    cursor += m.data.size();
  };
  take(p.w1);
  take(p.b1);
  take(p.w2);
  take(p.b2);
}

GanModel model_shell(int feature_dim, int attr_dim, int cond_dim,
                     int noise_dim, int hidden_dim) {
  GanModel m;
  m.noise_dim = noise_dim;
  m.generator.w1 = Matrix(hidden_dim, noise_dim + cond_dim);
  m.generator.b1 = Matrix(1, hidden_dim);
  m.generator.w2 = Matrix(feature_dim, hidden_dim);
  m.generator.b2 = Matrix(1, feature_dim);
  m.generator.hidden_act = Activation::LeakyRelu;
  m.generator.output_act = Activation::Relu;
  m.discriminator.w1 = Matrix(hidden_dim, feature_dim + attr_dim);
  m.discriminator.b1 = Matrix(1, hidden_dim);
  m.discriminator.w2 = Matrix(1, hidden_dim);
  m.discriminator.b2 = Matrix(1, 1);
  m.discriminator.hidden_act = Activation::LeakyRelu;
  m.discriminator.output_act = Activation::None;
  return m;
}

}  // namespace

std::string digest_hex(uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(digest));
  return std::string(buf);
}

void save_checkpoint(const std::string& stem, const Checkpoint& ckpt) {
  std::vector<float> blob;
  for (const GanModel& m : ckpt.clients) {
    append_mlp(blob, m.generator);
    append_mlp(blob, m.discriminator);
  }
  append_mlp(blob, ckpt.global.generator);
  append_mlp(blob, ckpt.global.discriminator);

  const std::string bin_path = stem + ".bin";
  {
    std::string tmp = bin_path + ".tmp";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError(bin_path + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(blob.data()),
              static_cast<std::streamsize>(blob.size() * sizeof(float)));
    if (!out) throw ParseError(bin_path + ": write failed");
    out.close();
    std::filesystem::rename(tmp, bin_path);
  }

  uint64_t blob_digest = fnv1a64(blob.data(), blob.size() * sizeof(float));
  std::string meta = "fzsl.ckpt v1\n";
  meta += "round=" + std::to_string(ckpt.round) + "\n";
  meta += "clients=" + std::to_string(ckpt.clients.size()) + "\n";
  meta += "feature_dim=" + std::to_string(ckpt.feature_dim) + "\n";
  meta += "attr_dim=" + std::to_string(ckpt.attr_dim) + "\n";
  meta += "cond_dim=" + std::to_string(ckpt.cond_dim) + "\n";
  meta += "embed_dim=" + std::to_string(ckpt.embed_dim) + "\n";
  meta += "noise_dim=" + std::to_string(ckpt.global.noise_dim) + "\n";
  meta += "hidden_dim=" + std::to_string(ckpt.config.hidden_dim) + "\n";
  meta += "blob_digest=" + digest_hex(blob_digest) + "\n";
  meta += "config_digest=" + digest_hex(config_digest(ckpt.config)) + "\n";
  const std::string echo = serialize_config(ckpt.config);
  size_t start = 0;
  while (start < echo.size()) {
    size_t pos = echo.find('\n', start);
    meta += "config." + echo.substr(start, pos - start) + "\n";
    start = pos + 1;
  }
  write_text_file(stem + ".meta", meta);
}

Checkpoint load_checkpoint(const std::string& stem) {
  const std::string meta_path = stem + ".meta";
  std::string meta = read_text_file(meta_path);

  Checkpoint ckpt;
  int clients = 0, noise_dim = 0, hidden_dim = 0;
  std::string blob_digest_hex;
  std::string config_text;
  int line_no = 0;
  size_t start = 0;
  bool saw_header = false;
  while (start < meta.size()) {
    size_t pos = meta.find('\n', start);
    if (pos == std::string::npos) pos = meta.size();
    std::string line = meta.substr(start, pos - start);
    start = pos + 1;
    ++line_no;
    if (line_no == 1) {
      if (line != "fzsl.ckpt v1")
        throw ParseError(meta_path, 1, "expected header 'fzsl.ckpt v1'");
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(meta_path, line_no, "expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (line.rfind("config.", 0) == 0) {
      config_text += line.substr(7) + "\n";
      continue;
    }
    auto as_int = [&]() {
      int v = 0;
      if (!parse_int(value, v))
        throw ParseError(meta_path, line_no, "bad value for " + key);
      return v;
    };
    if (key == "round") ckpt.round = as_int();
    else if (key == "clients") clients = as_int();
    else if (key == "feature_dim") ckpt.feature_dim = as_int();
    else if (key == "attr_dim") ckpt.attr_dim = as_int();
    else if (key == "cond_dim") ckpt.cond_dim = as_int();
    else if (key == "embed_dim") ckpt.embed_dim = as_int();
    else if (key == "noise_dim") noise_dim = as_int();
    else if (key == "hidden_dim") hidden_dim = as_int();
    else if (key == "blob_digest") blob_digest_hex = value;
    else if (key == "config_digest") ;  // recomputed below
    else
      throw ParseError(meta_path, line_no, "unknown key '" + key + "'");
  }
  if (!saw_header) throw ParseError(meta_path, 1, "empty checkpoint meta");
  ckpt.config = parse_config_text(config_text, meta_path + " (config echo)");

  const std::string bin_path = stem + ".bin";
  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw ParseError(bin_path + ": cannot open");
  in.seekg(0, std::ios::end);
  std::streamoff bytes = in.tellg();
  in.seekg(0);
  if (bytes < 0 || bytes % static_cast<std::streamoff>(sizeof(float)) != 0)
    throw ParseError(bin_path + ": size is not a multiple of 4");
  std::vector<float> blob(static_cast<size_t>(bytes) / sizeof(float));
  in.read(reinterpret_cast<char*>(blob.data()), bytes);
  if (!in) throw ParseError(bin_path + ": short read");

  uint64_t digest = fnv1a64(blob.data(), blob.size() * sizeof(float));
  if (digest_hex(digest) != blob_digest_hex)
    throw ParseError(bin_path + ": digest mismatch (expected " +
                     blob_digest_hex + ", blob hashes to " +
                     digest_hex(digest) + "); refusing to load");

  size_t cursor = 0;
  for (int i = 0; i < clients; ++i) {
    GanModel m = model_shell(ckpt.feature_dim, ckpt.attr_dim, ckpt.cond_dim,
                             noise_dim, hidden_dim);
    read_mlp(blob, cursor, m.generator);
    read_mlp(blob, cursor, m.discriminator);
    ckpt.clients.push_back(std::move(m));
  }
  ckpt.global = model_shell(ckpt.feature_dim, ckpt.attr_dim, ckpt.cond_dim,
                            noise_dim, hidden_dim);
  read_mlp(blob, cursor, ckpt.global.generator);
  read_mlp(blob, cursor, ckpt.global.discriminator);
  if (cursor != blob.size())
    throw ParseError(bin_path + ": trailing bytes after declared content");
  return ckpt;
}

}  // namespace fzsl
