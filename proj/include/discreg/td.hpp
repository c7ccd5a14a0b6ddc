#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "discreg/mdp.hpp"
#include "discreg/random.hpp"
#include "discreg/sampling.hpp"

namespace discreg {

/**
 * Linear features phi(s) (or phi(s, a)) stored as a lookup table.
 *
 * Row s * n_actions + a of the table holds phi(s, a); with n_actions == 1 the
 * map is a state feature map and row s holds phi(s).
 */
class FeatureMap {
 public:
  FeatureMap(Matrix table, std::size_t n_states, std::size_t n_actions = 1);

  /// One-hot features e_s (or e_{s,a}).
  static FeatureMap tabular(std::size_t n_states, std::size_t n_actions = 1);

  std::size_t dimension() const { return static_cast<std::size_t>(table_.cols()); }
  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  bool state_action() const { return n_actions_ > 1; }
  const Matrix& table() const { return table_; }

  /// Table row holding phi(s, a).
  Eigen::Index row_index(std::size_t s, std::size_t a = 0) const;

  auto evaluate(std::size_t s) const { return table_.row(row_index(s, 0)); }
  auto evaluate(std::size_t s, std::size_t a) const { return table_.row(row_index(s, a)); }

  double value(const Vector& theta, std::size_t s) const { return evaluate(s).dot(theta); }
  double value(const Vector& theta, std::size_t s, std::size_t a) const {
    return evaluate(s, a).dot(theta);
  }

  /// V(s) for every state (state features) or Q(s, a) as an S x A matrix.
  Vector state_values(const Vector& theta) const;
  Matrix q_values(const Vector& theta) const;

 private:
  Matrix table_;
  std::size_t n_states_;
  std::size_t n_actions_;
};

enum class RegKind { kNone, kActivation, kL2 };

/// Psi: activation -> factor * V(s)^2 at the sampled s; l2 -> factor * ||theta||^2.
struct Regularizer {
  RegKind kind = RegKind::kNone;
  double factor = 0.0;

  static Regularizer none() { return {}; }
  static Regularizer activation(double lambda) { return {RegKind::kActivation, lambda}; }
  static Regularizer l2(double lambda) { return {RegKind::kL2, lambda}; }
};

using LrSchedule = std::function<double(std::size_t)>;

/// alpha_i = 500 / (1000 + i).
double default_learning_rate(std::size_t i);

struct RegConfig {
  double gamma = 0.99;       // guidance discount used by the learner
  double gamma_eval = 0.99;  // discount of the quantity being estimated
  Regularizer reg;
  double reward_scale = 1.0;  // xi
  LrSchedule lr = default_learning_rate;
  std::size_t n_iter = 5000;
  /// m-step only: discount applied inside the reward sum (defaults to gamma).
  std::optional<double> return_discount;

  void validate() const;
};

struct EquivalenceParams {
  double lambda = 0.0;
  double xi = 1.0;
  double lr_scale = 1.0;
  std::size_t m = 1;
};

/**
 * Maps a guidance discount gamma < gamma_eval to the activation-regularized
 * gamma_eval learner producing the same iterates:
 * lambda = (ge^m - g^m) / (2 g^m), xi = ge^m / g^m, lr_scale = g^m / ge^m.
 */
EquivalenceParams equivalence_params(double gamma_eval, double gamma, std::size_t m = 1);

/// Iterates theta_0 .. theta_N, filled when passed to a learner.
struct IterateLog {
  std::vector<Vector> iterates;
};

void save_iterate_log_csv(const IterateLog& log, const std::string& path);

/// n uniform-with-replacement indices into a dataset of the given size.
std::vector<std::size_t> sample_indices(std::size_t dataset_size, std::size_t n, Rng& rng);

// Batch TD(0) on V: theta += a_i (xi r + gamma V(s') - V(s)) phi(s) - a_i grad Psi.
// The *_run variants consume an explicit index sequence (its length overrides n_iter).
Vector td0_run(const TransitionDataset& dataset, const FeatureMap& features,
               const RegConfig& config, Vector theta, std::span<const std::size_t> indices,
               IterateLog* log = nullptr);
Vector td0_batch(const TransitionDataset& dataset, const FeatureMap& features,
                 const RegConfig& config, const Vector& theta0, Rng& rng,
                 IterateLog* log = nullptr);

// Batch Expected SARSA(0): bootstrap sum_a' pi(a'|s') Q(s', a').
Vector expected_sarsa_run(const TransitionDataset& dataset, const Policy& policy,
                          const FeatureMap& features, const RegConfig& config, Vector theta,
                          std::span<const std::size_t> indices, IterateLog* log = nullptr);
Vector expected_sarsa_batch(const TransitionDataset& dataset, const Policy& policy,
                            const FeatureMap& features, const RegConfig& config,
                            const Vector& theta0, Rng& rng, IterateLog* log = nullptr);

// Batch SARSA(0): bootstrap Q(s', a_next) with the stored next action.
Vector sarsa_run(const TransitionDataset& dataset, const FeatureMap& features,
                 const RegConfig& config, Vector theta, std::span<const std::size_t> indices,
                 IterateLog* log = nullptr);
Vector sarsa_batch(const TransitionDataset& dataset, const FeatureMap& features,
                   const RegConfig& config, const Vector& theta0, Rng& rng,
                   IterateLog* log = nullptr);

// m-step TD on segments: target sum_t rd^t xi r_t + gamma^m V(s_m),
// rd = config.return_discount (defaults to gamma).
Vector m_step_td_run(std::span<const Segment> segments, const FeatureMap& features,
                     const RegConfig& config, std::size_t m, Vector theta,
                     std::span<const std::size_t> indices, IterateLog* log = nullptr);
Vector m_step_td_batch(std::span<const Segment> segments, const FeatureMap& features,
                       const RegConfig& config, std::size_t m, const Vector& theta0, Rng& rng,
                       IterateLog* log = nullptr);

/**
 * Runs the plain learner with discount gamma and the activation-regularized
 * learner with discount gamma_eval and the parameters of equivalence_params
 * on the same index sequence, and returns max_i ||theta_i - phi_i||_inf.
 * lambda_scale multiplies the regularization factor (1 for the exact pairing).
 */
double verify_prop1(const TransitionDataset& dataset, const FeatureMap& features,
                    double gamma_eval, double gamma, const Vector& theta0,
                    std::span<const std::size_t> indices, const LrSchedule& lr = default_learning_rate,
                    double lambda_scale = 1.0);

enum class QTarget { kExpectedSarsa, kSarsa };

/// Same pairing for Expected SARSA (or vanilla SARSA) over state-action features.
double verify_prop2(const TransitionDataset& dataset, const Policy& policy,
                    const FeatureMap& features, double gamma_eval, double gamma,
                    const Vector& theta0, std::span<const std::size_t> indices,
                    const LrSchedule& lr = default_learning_rate, double lambda_scale = 1.0,
                    QTarget target = QTarget::kExpectedSarsa);

/// Same pairing for m-step TD; the regularized run discounts rewards with gamma.
double verify_prop3(std::span<const Segment> segments, const FeatureMap& features,
                    double gamma_eval, double gamma, std::size_t m, const Vector& theta0,
                    std::span<const std::size_t> indices,
                    const LrSchedule& lr = default_learning_rate, double lambda_scale = 1.0);

/// Empirical mean of phi phi^T over the dataset's (s) or (s, a) inputs.
Matrix feature_second_moment(const FeatureMap& features, const TransitionDataset& dataset);

/// lambda * mean over the dataset of V(s)^2 (or Q(s, a)^2 for state-action features).
double activation_term(const FeatureMap& features, const TransitionDataset& dataset,
                       const Vector& theta, double lambda);

}  // namespace discreg
