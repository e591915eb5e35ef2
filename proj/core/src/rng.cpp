#include "loopid/core/rng.hpp"

#include <cmath>

namespace loopid {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

// Key for a (seed, stream) pair. Mixing the stream id before combining keeps
// adjacent ids far apart in key space.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream_id) noexcept {
  return mix64(mix64(seed + kGolden) ^ mix64(stream_id * kGolden + 0x632BE59BD9B4E019ULL));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::uint64_t sm = stream_key(seed, stream_id);
  for (auto& word : state_) {
    sm += kGolden;
    word = mix64(sm);
  }
  // All-zero state is the one fixed point of xoshiro; mix64 of distinct
  // inputs cannot produce four zeros, but guard anyway.
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = kGolden;
}

std::uint64_t RngStream::next_u64() noexcept {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double v1, v2, s;
  do {
    v1 = 2.0 * uniform() - 1.0;
    v2 = 2.0 * uniform() - 1.0;
    s = v1 * v1 + v2 * v2;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v2 * factor;
  has_spare_ = true;
  return v1 * factor;
}

std::size_t RngStream::categorical(std::span<const double> probs) noexcept {
  double total = 0.0;
  for (double p : probs) total += p;
  const double target = uniform() * total;
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    cumulative += probs[i];
    last_positive = i;
    if (target < cumulative) return i;
  }
  return last_positive;
}

RngStream RngStream::child(std::uint64_t id) const noexcept {
  return RngStream(stream_key(seed_, stream_id_), id);
}

RngStream make_rng(std::uint64_t seed, std::uint64_t stream_id) {
  return RngStream(seed, stream_id);
}

}  // namespace loopid
