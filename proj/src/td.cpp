#include "discreg/td.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace discreg {

FeatureMap::FeatureMap(Matrix table, std::size_t n_states, std::size_t n_actions)
    : table_(std::move(table)), n_states_(n_states), n_actions_(n_actions) {
  if (n_states_ == 0 || n_actions_ == 0) throw std::invalid_argument("empty feature domain");
  if (static_cast<std::size_t>(table_.rows()) != n_states_ * n_actions_) {
    throw std::invalid_argument("feature table needs one row per input");
  }
  if (table_.cols() == 0) throw std::invalid_argument("feature dimension must be positive");
  if (!table_.allFinite()) throw std::invalid_argument("features must be finite");
}

FeatureMap FeatureMap::tabular(std::size_t n_states, std::size_t n_actions) {
  const auto k = static_cast<Eigen::Index>(n_states * n_actions);
  return FeatureMap(Matrix::Identity(k, k), n_states, n_actions);
}

Eigen::Index FeatureMap::row_index(std::size_t s, std::size_t a) const {
  if (s >= n_states_ || a >= n_actions_) throw std::out_of_range("feature input out of range");
  return static_cast<Eigen::Index>(s * n_actions_ + a);
}

Vector FeatureMap::state_values(const Vector& theta) const {
  if (state_action()) throw std::logic_error("state_values needs state features");
  return table_ * theta;
}

Matrix FeatureMap::q_values(const Vector& theta) const {
  const Vector flat = table_ * theta;
  Matrix q(static_cast<Eigen::Index>(n_states_), static_cast<Eigen::Index>(n_actions_));
  for (std::size_t s = 0; s < n_states_; ++s) {
    for (std::size_t a = 0; a < n_actions_; ++a) {
      q(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) = flat[row_index(s, a)];
    }
  }
  return q;
}

double default_learning_rate(std::size_t i) { return 500.0 / (1000.0 + static_cast<double>(i)); }

void RegConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0) || !(gamma_eval > 0.0 && gamma_eval <= 1.0)) {
    throw std::invalid_argument("discounts must lie in [0, 1]");
  }
  if (gamma > gamma_eval) throw std::invalid_argument("guidance discount exceeds gamma_eval");
  if (!(reg.factor >= 0.0)) throw std::invalid_argument("regularization factor must be >= 0");
  if (!(reward_scale > 0.0)) throw std::invalid_argument("reward scale must be positive");
  if (!lr) throw std::invalid_argument("missing learning-rate schedule");
  if (return_discount && !(*return_discount >= 0.0 && *return_discount <= 1.0)) {
    throw std::invalid_argument("return discount must lie in [0, 1]");
  }
}

EquivalenceParams equivalence_params(double gamma_eval, double gamma, std::size_t m) {
  if (m == 0) throw std::invalid_argument("update horizon m must be >= 1");
  if (!(gamma > 0.0)) throw std::domain_error("guidance discount must be positive");
  if (!(gamma <= gamma_eval && gamma_eval <= 1.0)) {
    throw std::domain_error("need 0 < gamma <= gamma_eval <= 1");
  }
  const double md = static_cast<double>(m);
  const double g = std::pow(gamma, md);
  const double ge = std::pow(gamma_eval, md);
  if (gamma == gamma_eval) return {0.0, 1.0, 1.0, m};
  return {(ge - g) / (2.0 * g), ge / g, g / ge, m};
}

void save_iterate_log_csv(const IterateLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.precision(17);
  out << "iteration,param,value\n";
  for (std::size_t i = 0; i < log.iterates.size(); ++i) {
    const Vector& theta = log.iterates[i];
    for (Eigen::Index k = 0; k < theta.size(); ++k) out << i << ',' << k << ',' << theta[k] << '\n';
  }
}

std::vector<std::size_t> sample_indices(std::size_t dataset_size, std::size_t n, Rng& rng) {
  if (dataset_size == 0) throw std::invalid_argument("cannot sample from an empty dataset");
  std::uniform_int_distribution<std::size_t> pick(0, dataset_size - 1);
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = pick(rng);
  return out;
}

namespace {

struct SampleTarget {
  Eigen::Index feature_row;
  double target;  // xi r + bootstrap term, held fixed for this update
};

/**
 * Shared semi-gradient loop. target_of(index, theta) gives the feature row of
 * the updated input and the frozen target; the update is
 *   theta += a_i (target - phi^T theta) phi - a_i grad Psi(theta)
 * with all gradients evaluated at the current theta.
 */
template <typename TargetFn>
Vector semi_gradient_loop(const FeatureMap& features, const RegConfig& config, Vector theta,
                          std::span<const std::size_t> indices, std::size_t n_samples,
                          IterateLog* log, TargetFn&& target_of) {
  config.validate();
  if (n_samples == 0) throw std::invalid_argument("learner needs a nonempty dataset");
  if (static_cast<std::size_t>(theta.size()) != features.dimension()) {
    throw std::invalid_argument("theta0 length does not match the feature dimension");
  }
  const Matrix& table = features.table();
  if (log != nullptr) {
    log->iterates.clear();
    log->iterates.reserve(indices.size() + 1);
    log->iterates.push_back(theta);
  }
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= n_samples) throw std::out_of_range("sample index out of range");
    const SampleTarget st = target_of(indices[i], theta);
    const auto phi = table.row(st.feature_row);
    const double current = phi.dot(theta);
    const double alpha = config.lr(i);
    double phi_coeff = alpha * (st.target - current);
    switch (config.reg.kind) {
      case RegKind::kNone:
        break;
      case RegKind::kActivation:
        // grad of lambda * V(s)^2 is 2 lambda V(s) phi(s).
        phi_coeff -= alpha * 2.0 * config.reg.factor * current;
        break;
      case RegKind::kL2:
        theta -= (alpha * 2.0 * config.reg.factor) * theta;
        break;
    }
    theta += phi_coeff * phi.transpose();
    if (log != nullptr) log->iterates.push_back(theta);
  }
  return theta;
}

std::size_t checked_action(const Transition& t, const FeatureMap& features) {
  if (t.a >= features.n_actions()) throw std::out_of_range("action outside feature domain");
  return t.a;
}

}  // namespace

Vector td0_run(const TransitionDataset& dataset, const FeatureMap& features,
               const RegConfig& config, Vector theta, std::span<const std::size_t> indices,
               IterateLog* log) {
  if (features.state_action()) throw std::invalid_argument("TD(0) needs state features");
  const Matrix& table = features.table();
  return semi_gradient_loop(
      features, config, std::move(theta), indices, dataset.size(), log,
      [&](std::size_t idx, const Vector& th) {
        const Transition& t = dataset[idx];
        const double bootstrap = table.row(features.row_index(t.s_next)).dot(th);
        return SampleTarget{features.row_index(t.s),
                            config.reward_scale * t.r + config.gamma * bootstrap};
      });
}

Vector td0_batch(const TransitionDataset& dataset, const FeatureMap& features,
                 const RegConfig& config, const Vector& theta0, Rng& rng, IterateLog* log) {
  if (dataset.empty()) throw std::invalid_argument("learner needs a nonempty dataset");
  const auto indices = sample_indices(dataset.size(), config.n_iter, rng);
  return td0_run(dataset, features, config, theta0, indices, log);
}

Vector expected_sarsa_run(const TransitionDataset& dataset, const Policy& policy,
                          const FeatureMap& features, const RegConfig& config, Vector theta,
                          std::span<const std::size_t> indices, IterateLog* log) {
  if (policy.n_states() != features.n_states() || policy.n_actions() != features.n_actions()) {
    throw std::invalid_argument("policy does not match the state-action feature domain");
  }
  const Matrix& table = features.table();
  const auto n_actions = features.n_actions();
  return semi_gradient_loop(
      features, config, std::move(theta), indices, dataset.size(), log,
      [&](std::size_t idx, const Vector& th) {
        const Transition& t = dataset[idx];
        double expected = 0.0;
        for (std::size_t a = 0; a < n_actions; ++a) {
          const double p = policy.prob(t.s_next, a);
          if (p != 0.0) expected += p * table.row(features.row_index(t.s_next, a)).dot(th);
        }
        return SampleTarget{features.row_index(t.s, checked_action(t, features)),
                            config.reward_scale * t.r + config.gamma * expected};
      });
}

Vector expected_sarsa_batch(const TransitionDataset& dataset, const Policy& policy,
                            const FeatureMap& features, const RegConfig& config,
                            const Vector& theta0, Rng& rng, IterateLog* log) {
  if (dataset.empty()) throw std::invalid_argument("learner needs a nonempty dataset");
  const auto indices = sample_indices(dataset.size(), config.n_iter, rng);
  return expected_sarsa_run(dataset, policy, features, config, theta0, indices, log);
}

Vector sarsa_run(const TransitionDataset& dataset, const FeatureMap& features,
                 const RegConfig& config, Vector theta, std::span<const std::size_t> indices,
                 IterateLog* log) {
  const Matrix& table = features.table();
  return semi_gradient_loop(
      features, config, std::move(theta), indices, dataset.size(), log,
      [&](std::size_t idx, const Vector& th) {
        const Transition& t = dataset[idx];
        if (!t.a_next) throw std::invalid_argument("SARSA needs transitions with a_next");
        const double bootstrap = table.row(features.row_index(t.s_next, *t.a_next)).dot(th);
        return SampleTarget{features.row_index(t.s, checked_action(t, features)),
                            config.reward_scale * t.r + config.gamma * bootstrap};
      });
}

Vector sarsa_batch(const TransitionDataset& dataset, const FeatureMap& features,
                   const RegConfig& config, const Vector& theta0, Rng& rng, IterateLog* log) {
  if (dataset.empty()) throw std::invalid_argument("learner needs a nonempty dataset");
  const auto indices = sample_indices(dataset.size(), config.n_iter, rng);
  return sarsa_run(dataset, features, config, theta0, indices, log);
}

Vector m_step_td_run(std::span<const Segment> segments, const FeatureMap& features,
                     const RegConfig& config, std::size_t m, Vector theta,
                     std::span<const std::size_t> indices, IterateLog* log) {
  if (m == 0) throw std::invalid_argument("update horizon m must be >= 1");
  if (features.state_action()) throw std::invalid_argument("m-step TD needs state features");
  for (const auto& seg : segments) {
    if (seg.rewards.size() != m) throw std::invalid_argument("segment does not hold m rewards");
  }
  const double reward_discount = config.return_discount.value_or(config.gamma);
  const double bootstrap_discount = std::pow(config.gamma, static_cast<double>(m));
  const Matrix& table = features.table();
  return semi_gradient_loop(
      features, config, std::move(theta), indices, segments.size(), log,
      [&](std::size_t idx, const Vector& th) {
        const Segment& seg = segments[idx];
        double ret = 0.0;
        double weight = 1.0;
        for (double r : seg.rewards) {
          ret += weight * config.reward_scale * r;
          weight *= reward_discount;
        }
        const double bootstrap = table.row(features.row_index(seg.s_end)).dot(th);
        return SampleTarget{features.row_index(seg.s), ret + bootstrap_discount * bootstrap};
      });
}

Vector m_step_td_batch(std::span<const Segment> segments, const FeatureMap& features,
                       const RegConfig& config, std::size_t m, const Vector& theta0, Rng& rng,
                       IterateLog* log) {
  if (segments.empty()) throw std::invalid_argument("learner needs a nonempty dataset");
  const auto indices = sample_indices(segments.size(), config.n_iter, rng);
  return m_step_td_run(segments, features, config, m, theta0, indices, log);
}

namespace {

// The plain configuration and its activation-regularized counterpart.
std::pair<RegConfig, RegConfig> paired_configs(double gamma_eval, double gamma, std::size_t m,
                                               const LrSchedule& lr, double lambda_scale) {
  const EquivalenceParams eq = equivalence_params(gamma_eval, gamma, m);
  RegConfig plain;
  plain.gamma = gamma;
  plain.gamma_eval = gamma_eval;
  plain.lr = lr;
  RegConfig regularized;
  regularized.gamma = gamma_eval;
  regularized.gamma_eval = gamma_eval;
  regularized.reg = Regularizer::activation(eq.lambda * lambda_scale);
  regularized.reward_scale = eq.xi;
  regularized.lr = [lr, scale = eq.lr_scale](std::size_t i) { return scale * lr(i); };
  return {plain, regularized};
}

double max_discrepancy(const IterateLog& a, const IterateLog& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.iterates.size() && i < b.iterates.size(); ++i) {
    worst = std::max(worst, (a.iterates[i] - b.iterates[i]).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

}  // namespace

double verify_prop1(const TransitionDataset& dataset, const FeatureMap& features,
                    double gamma_eval, double gamma, const Vector& theta0,
                    std::span<const std::size_t> indices, const LrSchedule& lr,
                    double lambda_scale) {
  const auto [plain, regularized] = paired_configs(gamma_eval, gamma, 1, lr, lambda_scale);
  IterateLog a, b;
  td0_run(dataset, features, plain, theta0, indices, &a);
  td0_run(dataset, features, regularized, theta0, indices, &b);
  return max_discrepancy(a, b);
}

double verify_prop2(const TransitionDataset& dataset, const Policy& policy,
                    const FeatureMap& features, double gamma_eval, double gamma,
                    const Vector& theta0, std::span<const std::size_t> indices,
                    const LrSchedule& lr, double lambda_scale, QTarget target) {
  const auto [plain, regularized] = paired_configs(gamma_eval, gamma, 1, lr, lambda_scale);
  IterateLog a, b;
  if (target == QTarget::kExpectedSarsa) {
    expected_sarsa_run(dataset, policy, features, plain, theta0, indices, &a);
    expected_sarsa_run(dataset, policy, features, regularized, theta0, indices, &b);
  } else {
    sarsa_run(dataset, features, plain, theta0, indices, &a);
    sarsa_run(dataset, features, regularized, theta0, indices, &b);
  }
  return max_discrepancy(a, b);
}

double verify_prop3(std::span<const Segment> segments, const FeatureMap& features,
                    double gamma_eval, double gamma, std::size_t m, const Vector& theta0,
                    std::span<const std::size_t> indices, const LrSchedule& lr,
                    double lambda_scale) {
  auto [plain, regularized] = paired_configs(gamma_eval, gamma, m, lr, lambda_scale);
  regularized.return_discount = gamma;
  IterateLog a, b;
  m_step_td_run(segments, features, plain, m, theta0, indices, &a);
  m_step_td_run(segments, features, regularized, m, theta0, indices, &b);
  return max_discrepancy(a, b);
}

Matrix feature_second_moment(const FeatureMap& features, const TransitionDataset& dataset) {
  if (dataset.empty()) throw std::invalid_argument("empty dataset");
  const auto k = static_cast<Eigen::Index>(features.dimension());
  Matrix moment = Matrix::Zero(k, k);
  for (const auto& t : dataset.transitions) {
    const auto phi = features.state_action() ? features.evaluate(t.s, t.a) : features.evaluate(t.s);
    moment.noalias() += phi.transpose() * phi;
  }
  return moment / static_cast<double>(dataset.size());
}

double activation_term(const FeatureMap& features, const TransitionDataset& dataset,
                       const Vector& theta, double lambda) {
  if (dataset.empty()) throw std::invalid_argument("empty dataset");
  if (static_cast<std::size_t>(theta.size()) != features.dimension()) {
    throw std::invalid_argument("theta length does not match the feature dimension");
  }
  double total = 0.0;
  for (const auto& t : dataset.transitions) {
    const double v = features.state_action() ? features.value(theta, t.s, t.a)
                                              : features.value(theta, t.s);
    total += v * v;
  }
  return lambda * total / static_cast<double>(dataset.size());
}

}  // namespace discreg
