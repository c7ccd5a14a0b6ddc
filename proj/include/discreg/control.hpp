#pragma once

#include <cstddef>

#include "discreg/mdp.hpp"
#include "discreg/random.hpp"
#include "discreg/td.hpp"

namespace discreg {

enum class Evaluator { kSarsa, kExpectedSarsa, kLstdq };

/// ||V^pi - V*||_1 under the true model and gamma_eval.
double optimality_loss(const TabularMdp& mdp, const Policy& policy, double gamma_eval);
/// Same, against a precomputed optimal value.
double optimality_loss(const TabularMdp& mdp, const Policy& policy, double gamma_eval,
                       const ValueVector& optimal);

struct ApiSettings {
  std::size_t episodes = 5;
  std::size_t n_traj = 16;
  std::size_t traj_len = 10;
  double epsilon = 0.1;
  Evaluator evaluator = Evaluator::kSarsa;
  /// Ridge added to LSTDQ on top of an l2 regularizer in the evaluation config.
  double lstdq_ridge_floor = 1e-6;
};

struct ApiResult {
  Policy policy;
  double optimality_loss = 0.0;
};

/**
 * Approximate policy iteration from the uniform policy. Every episode gathers
 * fresh trajectories with the epsilon-greedy version of the current policy,
 * estimates Q of that behavior policy from zero with the chosen evaluator under
 * eval_config, and moves to the greedy policy. The loss of the final policy is
 * measured at eval_config.gamma_eval.
 */
ApiResult approx_policy_iteration(const TabularMdp& mdp, const ApiSettings& settings,
                                  const RegConfig& eval_config, Rng& rng);
ApiResult approx_policy_iteration(const TabularMdp& mdp, const ApiSettings& settings,
                                  const RegConfig& eval_config, Rng& rng,
                                  const ValueVector& optimal);

}  // namespace discreg
