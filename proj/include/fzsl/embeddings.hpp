#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fzsl/matrix.hpp"
#include "fzsl/rng.hpp"

namespace fzsl {

// Class name -> text embedding vector, produced offline by a frozen text
// encoder (or the pseudo generator below). File order is preserved so a
// write/reload round-trip is byte-identical.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(int embed_dim, std::string source_tag);

  void add(const std::string& class_name, std::vector<float> vec);
  const std::vector<float>* find(const std::string& class_name) const;

  int embed_dim() const { return embed_dim_; }
  const std::string& source_tag() const { return source_tag_; }
  size_t size() const { return order_.size(); }
  const std::vector<std::string>& names() const { return order_; }

 private:
  int embed_dim_ = 0;
  std::string source_tag_ = "unknown";
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::vector<float>> entries_;
};

EmbeddingTable load_embedding_table(const std::string& path);
void save_embedding_table(const EmbeddingTable& table,
                          const std::string& path);

// Deterministic unit-norm stand-in embedding keyed by (seed, class name);
// substitutes for encoder output when none is supplied.
std::vector<float> pseudo_embedding(const std::string& class_name,
                                    int embed_dim, uint64_t seed);

EmbeddingTable make_pseudo_embedding_table(
    const std::vector<std::string>& class_names, int embed_dim, uint64_t seed);

// Semantic knowledge augmentation settings. gamma is the standard deviation
// of the noise added to the text embedding.
struct SkaConfig {
  bool enabled = false;
  float gamma = 0.1f;
  bool resample_per_draw = true;

  void validate() const;
};

// a_ska = [text_embedding + noise, attribute]. With gamma = 0 this is the
// exact concatenation and consumes no randomness. The attribute block is
// copied bit-for-bit; noise only ever touches the embedding block.
std::vector<float> augment_attribute(const std::vector<float>& text_embedding,
                                     const std::vector<float>& attribute,
                                     const SkaConfig& ska, RngStream& rng);

}  // namespace fzsl
