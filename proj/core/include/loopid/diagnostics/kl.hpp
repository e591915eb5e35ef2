#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "loopid/core/parameter.hpp"
#include "loopid/markov/chain.hpp"
#include "loopid/models/tabular.hpp"

namespace loopid {

/// E_{p(Phi)}[ KL(P(.|Phi) || Q(.|Phi)) ] as an exact finite sum with
/// 0 log(0/q) = 0. Returns +inf if Q vanishes where P does not.
double exact_kl_bias(const ControlledMarkovChain& chain, const TabularMarkovModel& model);
double exact_kl_bias(const ControlledMarkovChain& chain, const RegressorDistribution& dist,
                     const TabularMarkovModel& model);

/// sum_Phi p(Phi) sum_s' P log P: the asymptotic objective of the true model
/// (negative conditional entropy).
double true_model_objective(const ControlledMarkovChain& chain);

struct KlOracleResult {
  std::size_t best_index = 0;
  double best_bias = 0.0;
  std::vector<double> bias_curve;
};

/// Grid point minimizing exact_kl_bias; lowest index on ties.
KlOracleResult argmin_kl_oracle(const ControlledMarkovChain& chain,
                                std::span<const TabularMarkovModel> grid);
KlOracleResult argmin_kl_oracle(const ControlledMarkovChain& chain, const TabularFamily& family,
                                std::span<const ParameterVector> grid);

}  // namespace loopid
