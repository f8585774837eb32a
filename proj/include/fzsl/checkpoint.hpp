#pragma once

#include <string>
#include <vector>

#include "fzsl/fedcore.hpp"
#include "fzsl/gan.hpp"

namespace fzsl {

// Checkpoint = <stem>.meta (text: version, round, dims, digests, config
// echo) + <stem>.bin (little-endian float32 blob). Blob ordering: for each
// client then the global model, generator w1, b1, w2, b2 followed by the
// discriminator likewise.
struct Checkpoint {
  int round = 0;
  FedConfig config;
  int feature_dim = 0;
  int attr_dim = 0;
  int cond_dim = 0;
  int embed_dim = 0;  // 0 when SKA is off
  std::vector<GanModel> clients;
  GanModel global;
};

void save_checkpoint(const std::string& stem, const Checkpoint& ckpt);

// Recomputes the blob digest and refuses to load on mismatch.
Checkpoint load_checkpoint(const std::string& stem);

std::string digest_hex(uint64_t digest);

}  // namespace fzsl
