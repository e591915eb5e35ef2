#pragma once

#include <cstddef>
#include <string>

namespace loopid {

enum class ObsKind { continuous, finite };

/// Observation space of one signal: either R^dim or a finite alphabet
/// {0, ..., alphabet_size - 1}.
class ObsSpace {
 public:
  static ObsSpace continuous(std::size_t dim = 1);
  static ObsSpace finite(std::size_t alphabet_size);

  ObsKind kind() const noexcept { return kind_; }
  bool is_finite() const noexcept { return kind_ == ObsKind::finite; }
  bool is_continuous() const noexcept { return kind_ == ObsKind::continuous; }

  /// Dimension for continuous spaces, alphabet size for finite ones.
  std::size_t size() const noexcept { return size_; }

  std::string describe() const;

  friend bool operator==(const ObsSpace&, const ObsSpace&) = default;

 private:
  ObsSpace(ObsKind kind, std::size_t size) : kind_(kind), size_(size) {}

  ObsKind kind_;
  std::size_t size_;
};

}  // namespace loopid
