#include "loopid/diagnostics/regularity.hpp"

#include <algorithm>
#include <cmath>

#include "loopid/core/error.hpp"

namespace loopid {

LipschitzProbe lipschitz_probe(const ParametricModel& model, std::span<const Trajectory> bank,
                               const Box& box, std::size_t pairs, const RngStream& rng) {
  if (bank.empty()) throw InvalidArgument("Lipschitz probe: empty trajectory bank");
  if (box.dimension() != model.dimension()) {
    throw InvalidArgument("Lipschitz probe: box dimension does not match the model");
  }
  RngStream gen = rng;
  auto draw = [&] {
    std::vector<double> theta(box.dimension());
    for (std::size_t i = 0; i < theta.size(); ++i) {
      theta[i] = box[i].lo + box[i].width() * gen.uniform();
    }
    return theta;
  };
  LipschitzProbe out;
  for (std::size_t p = 0; p < pairs; ++p) {
    const auto a = draw();
    const auto b = draw();
    const Trajectory& traj = bank[gen.next_u64() % bank.size()];
    double dist = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dist += (a[i] - b[i]) * (a[i] - b[i]);
    dist = std::sqrt(dist);
    if (dist == 0.0) continue;
    const auto la = loglik_series(model, a, traj);
    const auto lb = loglik_series(model, b, traj);
    for (std::size_t t = 0; t < la.values.size(); ++t) {
      out.max_ratio = std::max(out.max_ratio, std::abs(la.values[t] - lb.values[t]) / dist);
    }
    ++out.pairs;
  }
  return out;
}

double dominance_probe(const ParametricModel& model, std::span<const Trajectory> bank,
                       std::span<const ParameterVector> grid) {
  if (bank.empty()) throw InvalidArgument("dominance probe: empty trajectory bank");
  if (grid.empty()) throw InvalidArgument("dominance probe: empty grid");
  double total = 0.0;
  for (const auto& traj : bank) {
    double sup = 0.0;
    for (const auto& theta : grid) {
      const double l = loglik_at(model, theta, traj, traj.length());
      sup = std::max(sup, l * l);
    }
    total += sup;
  }
  return total / static_cast<double>(bank.size());
}

}  // namespace loopid
