#include "fzsl/embeddings.hpp"

#include <cmath>
#include <stdexcept>

#include "fzsl/errors.hpp"
#include "fzsl/textio.hpp"

namespace fzsl {

EmbeddingTable::EmbeddingTable(int embed_dim, std::string source_tag)
    : embed_dim_(embed_dim), source_tag_(std::move(source_tag)) {
  if (embed_dim_ <= 0)
    throw std::invalid_argument("embedding table: dimension must be positive");
}

void EmbeddingTable::add(const std::string& class_name,
                         std::vector<float> vec) {
  if (class_name.empty())
    throw std::invalid_argument("embedding table: empty class name");
  if (static_cast<int>(vec.size()) != embed_dim_)
    throw std::invalid_argument("embedding table: vector for '" + class_name +
                                "' has length " + std::to_string(vec.size()) +
                                ", expected " + std::to_string(embed_dim_));
  for (float v : vec)
    if (!std::isfinite(v))
      throw std::invalid_argument("embedding table: non-finite entry for '" +
                                  class_name + "'");
  if (!entries_.emplace(class_name, std::move(vec)).second)
    throw std::invalid_argument("embedding table: duplicate class name '" +
                                class_name + "'");
  order_.push_back(class_name);
}

const std::vector<float>* EmbeddingTable::find(
    const std::string& class_name) const {
  auto it = entries_.find(class_name);
  return it == entries_.end() ? nullptr : &it->second;
}

EmbeddingTable load_embedding_table(const std::string& path) {
  std::string body = read_text_file(path);
  std::vector<std::string_view> lines;
  {
    size_t start = 0;
    while (start <= body.size()) {
      size_t pos = body.find('\n', start);
      if (pos == std::string::npos) {
        if (start < body.size()) lines.push_back(std::string_view(body).substr(start));
        break;
      }
      lines.push_back(std::string_view(body).substr(start, pos - start));
      start = pos + 1;
    }
  }
  if (lines.empty()) throw ParseError(path, 1, "empty file");
  auto head = split(lines[0], ' ');
  if (head.size() != 5 || head[0] != "fzsl.embed" || head[1] != "v1")
    throw ParseError(path, 1,
                     "expected header 'fzsl.embed v1 c=<C> d=<d> src=<tag>'");
  auto field = [&](std::string_view tok, std::string_view key) {
    if (tok.size() <= key.size() + 1 || tok.substr(0, key.size()) != key ||
        tok[key.size()] != '=')
      throw ParseError(path, 1, "expected " + std::string(key) + "=<int>");
    int v = 0;
    if (!parse_int(tok.substr(key.size() + 1), v) || v <= 0)
      throw ParseError(path, 1, "bad value in " + std::string(tok));
    return v;
  };
  int c = field(head[2], "c");
  int d = field(head[3], "d");
  if (head[4].substr(0, 4) != "src=")
    throw ParseError(path, 1, "expected src=<tag>");
  if (lines.size() != static_cast<size_t>(c) + 1)
    throw ParseError(path, static_cast<int>(std::min(lines.size(), static_cast<size_t>(c)) + 1),
                     lines.size() > static_cast<size_t>(c) + 1
                         ? "trailing garbage after declared content"
                         : "unexpected end of file");

  EmbeddingTable table(d, std::string(head[4].substr(4)));
  for (int i = 0; i < c; ++i) {
    int line_no = i + 2;
    auto fields = split(lines[static_cast<size_t>(i) + 1], ',');
    if (static_cast<int>(fields.size()) != d + 1)
      throw ParseError(path, line_no,
                       "expected <class_name> plus " + std::to_string(d) +
                           " values");
    std::vector<float> vec(static_cast<size_t>(d));
    for (int k = 0; k < d; ++k)
      if (!parse_float(fields[static_cast<size_t>(k) + 1], vec[static_cast<size_t>(k)]))
        throw ParseError(path, line_no,
                         "bad embedding value '" +
                             std::string(fields[static_cast<size_t>(k) + 1]) + "'");
    try {
      table.add(std::string(fields[0]), std::move(vec));
    } catch (const std::invalid_argument& e) {
      throw ParseError(path, line_no, e.what());
    }
  }
  return table;
}

void save_embedding_table(const EmbeddingTable& table,
                          const std::string& path) {
  std::string body = "fzsl.embed v1 c=" + std::to_string(table.size()) +
                     " d=" + std::to_string(table.embed_dim()) +
                     " src=" + table.source_tag() + "\n";
  for (const auto& name : table.names()) {
    body += name;
    for (float v : *table.find(name)) body += "," + format_float(v);
    body += "\n";
  }
  write_text_file(path, body);
}

std::vector<float> pseudo_embedding(const std::string& class_name,
                                    int embed_dim, uint64_t seed) {
  if (class_name.empty())
    throw std::invalid_argument("pseudo_embedding: empty class name");
  if (embed_dim <= 0)
    throw std::invalid_argument("pseudo_embedding: dimension must be positive");
  RngStream rng(seed, "embed/" + class_name);
  std::vector<float> v(static_cast<size_t>(embed_dim));
  for (float& x : v) x = rng.next_normal();
  float norm_sq = 0.0f;
  for (float x : v) norm_sq += x * x;
  float inv = 1.0f / std::sqrt(norm_sq);
  for (float& x : v) x *= inv;
  return v;
}

EmbeddingTable make_pseudo_embedding_table(
    const std::vector<std::string>& class_names, int embed_dim,
    uint64_t seed) {
  EmbeddingTable table(embed_dim, "pseudo");
  for (const auto& name : class_names)
    table.add(name, pseudo_embedding(name, embed_dim, seed));
  return table;
}

void SkaConfig::validate() const {
  if (!(gamma >= 0.0f))
    throw std::invalid_argument("ska: gamma must be >= 0");
}

std::vector<float> augment_attribute(const std::vector<float>& text_embedding,
                                     const std::vector<float>& attribute,
                                     const SkaConfig& ska, RngStream& rng) {
  if (!ska.enabled)
    throw std::invalid_argument("augment_attribute: ska is disabled");
  ska.validate();
  if (text_embedding.empty() || attribute.empty())
    throw std::invalid_argument("augment_attribute: empty input vector");
  std::vector<float> out;
  out.reserve(text_embedding.size() + attribute.size());
  if (ska.gamma == 0.0f) {
    out.insert(out.end(), text_embedding.begin(), text_embedding.end());
  } else {
    for (float v : text_embedding)
      out.push_back(v + ska.gamma * rng.next_normal());
  }
  out.insert(out.end(), attribute.begin(), attribute.end());
  return out;
}

}  // namespace fzsl
