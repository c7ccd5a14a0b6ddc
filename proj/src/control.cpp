#include "discreg/control.hpp"

#include <stdexcept>

#include "discreg/lstd.hpp"
#include "discreg/sampling.hpp"

namespace discreg {

double optimality_loss(const TabularMdp& mdp, const Policy& policy, double gamma_eval) {
  return optimality_loss(mdp, policy, gamma_eval, optimal_value(mdp, gamma_eval).value);
}

double optimality_loss(const TabularMdp& mdp, const Policy& policy, double gamma_eval,
                       const ValueVector& optimal) {
  if (static_cast<std::size_t>(optimal.size()) != mdp.n_states()) {
    throw std::invalid_argument("optimal value has the wrong size");
  }
  return (exact_value(mdp, policy, gamma_eval) - optimal).lpNorm<1>();
}

ApiResult approx_policy_iteration(const TabularMdp& mdp, const ApiSettings& settings,
                                  const RegConfig& eval_config, Rng& rng) {
  return approx_policy_iteration(mdp, settings, eval_config, rng,
                                 optimal_value(mdp, eval_config.gamma_eval).value);
}

ApiResult approx_policy_iteration(const TabularMdp& mdp, const ApiSettings& settings,
                                  const RegConfig& eval_config, Rng& rng,
                                  const ValueVector& optimal) {
  if (settings.episodes == 0) throw std::invalid_argument("need at least one episode");
  eval_config.validate();
  const FeatureMap features = FeatureMap::tabular(mdp.n_states(), mdp.n_actions());
  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(features.dimension()));

  Policy policy = Policy::uniform(mdp.n_states(), mdp.n_actions());
  for (std::size_t episode = 0; episode < settings.episodes; ++episode) {
    const Policy behavior = epsilon_greedy(policy, settings.epsilon);
    const TransitionDataset data =
        collect_trajectories(mdp, behavior, settings.n_traj, settings.traj_len, rng);
    Vector theta;
    switch (settings.evaluator) {
      case Evaluator::kSarsa:
        theta = sarsa_batch(data, features, eval_config, zero, rng);
        break;
      case Evaluator::kExpectedSarsa:
        theta = expected_sarsa_batch(data, behavior, features, eval_config, zero, rng);
        break;
      case Evaluator::kLstdq: {
        double ridge = settings.lstdq_ridge_floor;
        if (eval_config.reg.kind == RegKind::kL2) ridge += eval_config.reg.factor;
        theta = lstdq(data, features, behavior, eval_config.gamma, ridge);
        break;
      }
    }
    policy = greedy_policy(features.q_values(theta));
  }
  const double loss = optimality_loss(mdp, policy, eval_config.gamma_eval, optimal);
  return {std::move(policy), loss};
}

}  // namespace discreg
