#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace discreg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Value of each state, in reward units.
using ValueVector = Eigen::VectorXd;
/// Q[s][a], in reward units.
using QMatrix = Eigen::MatrixXd;

/**
 * Finite MDP with Gaussian rewards.
 *
 * transition[a](s, s') is the probability of moving to s' after taking a in s.
 * Rewards for (s, a) are drawn from N(reward_mean(s, a), reward_std(s, a)^2).
 * Instances are validated on construction and immutable afterwards.
 */
class TabularMdp {
 public:
  TabularMdp(std::vector<Matrix> transition, Matrix reward_mean, Matrix reward_std,
             Vector initial_dist);

  std::size_t n_states() const { return static_cast<std::size_t>(reward_mean_.rows()); }
  std::size_t n_actions() const { return static_cast<std::size_t>(reward_mean_.cols()); }

  /// Row-stochastic S x S matrix of action a.
  const Matrix& transition(std::size_t a) const { return transition_[a]; }
  double transition(std::size_t s, std::size_t a, std::size_t s_next) const {
    return transition_[a](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s_next));
  }
  const Matrix& reward_mean() const { return reward_mean_; }
  const Matrix& reward_std() const { return reward_std_; }
  const Vector& initial_dist() const { return initial_dist_; }

  bool operator==(const TabularMdp& other) const;

 private:
  std::vector<Matrix> transition_;
  Matrix reward_mean_;
  Matrix reward_std_;
  Vector initial_dist_;
};

/// Stochastic policy; probs(s, a) = pi(a | s).
class Policy {
 public:
  explicit Policy(Matrix probs);

  static Policy uniform(std::size_t n_states, std::size_t n_actions);
  /// One-hot rows selecting actions[s].
  static Policy deterministic(const std::vector<std::size_t>& actions, std::size_t n_actions);

  const Matrix& probs() const { return probs_; }
  double prob(std::size_t s, std::size_t a) const {
    return probs_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
  }
  std::size_t n_states() const { return static_cast<std::size_t>(probs_.rows()); }
  std::size_t n_actions() const { return static_cast<std::size_t>(probs_.cols()); }

  /// Index of the most probable action in s, lowest index on ties.
  std::size_t mode(std::size_t s) const;

 private:
  Matrix probs_;
};

/// Row-stochastic P^pi(s, s') = sum_a pi(a|s) P(s' | s, a).
Matrix induced_chain(const TabularMdp& mdp, const Policy& policy);

/// Expected immediate reward under the policy, r^pi(s).
Vector induced_reward(const TabularMdp& mdp, const Policy& policy);

/// Solves (I - gamma P^pi) V = r^pi. Throws std::domain_error unless 0 <= gamma < 1.
ValueVector exact_value(const TabularMdp& mdp, const Policy& policy, double gamma);

/// Q(s, a) = R(s, a) + gamma * sum_s' P(s'|s,a) V(s').
QMatrix exact_q(const TabularMdp& mdp, const Policy& policy, double gamma);

/// Bellman optimality backup (T* V)(s).
ValueVector bellman_optimality(const TabularMdp& mdp, const ValueVector& v, double gamma);

struct OptimalSolution {
  ValueVector value;
  Policy policy;
};

/**
 * Value iteration until ||V - T*V||_inf < tol, followed by exact evaluation
 * and improvement of the greedy policy until it is stable. The returned value
 * is the exact value of the returned greedy policy.
 */
OptimalSolution optimal_value(const TabularMdp& mdp, double gamma, double tol = 1e-10);

/// Deterministic argmax policy; ties go to the lowest action index.
Policy greedy_policy(const QMatrix& q);

/// (1 - epsilon) * base + epsilon * uniform.
Policy epsilon_greedy(const Policy& base, double epsilon);

// Structured text (JSON) serialization of MDP instances.
std::string mdp_to_json(const TabularMdp& mdp);
TabularMdp mdp_from_json(const std::string& text);
void save_mdp(const TabularMdp& mdp, const std::string& path);
TabularMdp load_mdp(const std::string& path);

}  // namespace discreg
