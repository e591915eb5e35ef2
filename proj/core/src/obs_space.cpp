#include "loopid/core/obs_space.hpp"

#include "loopid/core/error.hpp"

namespace loopid {

ObsSpace ObsSpace::continuous(std::size_t dim) {
  if (dim < 1) throw InvalidArgument("continuous observation space needs dim >= 1");
  return ObsSpace(ObsKind::continuous, dim);
}

ObsSpace ObsSpace::finite(std::size_t alphabet_size) {
  if (alphabet_size < 2) {
    throw InvalidArgument("finite observation space needs at least 2 symbols");
  }
  return ObsSpace(ObsKind::finite, alphabet_size);
}

std::string ObsSpace::describe() const {
  return is_finite() ? "finite(" + std::to_string(size_) + ")"
                     : "continuous(" + std::to_string(size_) + ")";
}

}  // namespace loopid
