#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>

namespace loopid {

/// Deterministic random stream identified by (seed, stream_id).
///
/// The generator is xoshiro256** whose 256-bit state is filled by splitmix64
/// from a key that mixes both identifiers. Normals come from the Marsaglia
/// polar method, so draw sequences do not depend on the standard library's
/// distribution implementations. `child(k)` yields named substreams whose
/// identity depends only on (seed, stream_id, k), never on how many draws the
/// parent has made; Monte-Carlo replications use one child each.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal.
  double normal() noexcept;
  /// Index drawn from a probability vector (entries need not sum exactly to 1).
  std::size_t categorical(std::span<const double> probs) noexcept;

  RngStream child(std::uint64_t id) const noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() noexcept { return next_u64(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> state_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

RngStream make_rng(std::uint64_t seed, std::uint64_t stream_id);

}  // namespace loopid
