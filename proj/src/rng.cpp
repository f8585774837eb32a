#include "fzsl/rng.hpp"

#include <cmath>
#include <numbers>

namespace fzsl {

namespace {

inline uint64_t splitmix64_mix(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ull;

}  // namespace

uint64_t fnv1a64(const void* data, size_t n, uint64_t basis) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = basis;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

RngStream::RngStream(uint64_t seed, std::string_view label)
    : seed_(seed), label_(label) {
  state_ = splitmix64_mix(seed + kGolden) ^ fnv1a64(label);
  state_ = splitmix64_mix(state_);
}

uint64_t RngStream::next_u64() {
  state_ += kGolden;
  return splitmix64_mix(state_);
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

float RngStream::next_uniform() {
  // 24 mantissa bits; stays strictly below 1.
  return static_cast<float>(next_u64() >> 40) * 0x1.0p-24f;
}

float RngStream::next_normal() {
  // Box-Muller, cosine branch only. u1 in (0,1] so the log is finite.
  double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  double r = std::sqrt(-2.0 * std::log(u1));
  return static_cast<float>(r * std::cos(2.0 * std::numbers::pi * u2));
}

uint64_t RngStream::next_below(uint64_t bound) {
  // Multiply-shift map of the raw draw onto [0, bound).
  return static_cast<uint64_t>(
      (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
}

RngStream derive_rng(uint64_t global_seed, int64_t round, int64_t client_id,
                     std::string_view purpose) {
  uint64_t h = fnv1a64(purpose);
  h = fnv1a64(&round, sizeof(round), h);
  h = fnv1a64(&client_id, sizeof(client_id), h);
  std::string label = std::string(purpose) + "/r" + std::to_string(round) +
                      "/c" + std::to_string(client_id);
  RngStream s(global_seed ^ splitmix64_mix(h), label);
  return s;
}

}  // namespace fzsl
