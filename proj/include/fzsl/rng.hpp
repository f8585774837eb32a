#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace fzsl {

// Counter-based deterministic random stream (SplitMix64 core).
//
// A stream is identified by a 64-bit seed and a label. Equal (seed, label)
// pairs always produce the same sequence; the sequence never depends on
// thread scheduling. Streams are single-consumer: hand each worker its own.
class RngStream {
 public:
  RngStream() : RngStream(0, "default") {}
  RngStream(uint64_t seed, std::string_view label);

  uint64_t next_u64();
  // Uniform in [0, 1).
  double next_double();
  float next_uniform();
  // Standard normal via Box-Muller; consumes two raw draws per call.
  float next_normal();
  // Uniform integer in [0, bound); bound must be > 0.
  uint64_t next_below(uint64_t bound);

  uint64_t seed() const { return seed_; }
  const std::string& label() const { return label_; }

 private:
  uint64_t state_ = 0;
  uint64_t seed_ = 0;
  std::string label_;
};

// Sentinel client id for server-side streams.
inline constexpr int64_t kServerId = -1;

// Stream keyed by (seed, round, client, purpose). All randomness in a run is
// drawn from streams derived this way, so results are independent of how
// work is scheduled across threads.
RngStream derive_rng(uint64_t global_seed, int64_t round, int64_t client_id,
                     std::string_view purpose);

// FNV-1a over raw bytes; used for stream labels and file digests.
uint64_t fnv1a64(const void* data, size_t n,
                 uint64_t basis = 14695981039346656037ull);
uint64_t fnv1a64(std::string_view s);

}  // namespace fzsl
