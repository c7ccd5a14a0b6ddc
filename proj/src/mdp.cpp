#include "discreg/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace discreg {
namespace {

constexpr double kSumTol = 1e-12;

void check_distribution(const Eigen::Ref<const Vector>& p, const std::string& what) {
  if ((p.array() < 0.0).any() || !p.allFinite()) {
    throw std::invalid_argument(what + " has negative or non-finite entries");
  }
  if (std::abs(p.sum() - 1.0) > kSumTol) {
    throw std::invalid_argument(what + " does not sum to 1");
  }
}

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::domain_error("discount must lie in [0, 1), got " + std::to_string(gamma));
  }
}

}  // namespace

TabularMdp::TabularMdp(std::vector<Matrix> transition, Matrix reward_mean, Matrix reward_std,
                       Vector initial_dist)
    : transition_(std::move(transition)),
      reward_mean_(std::move(reward_mean)),
      reward_std_(std::move(reward_std)),
      initial_dist_(std::move(initial_dist)) {
  const auto n_s = reward_mean_.rows();
  const auto n_a = reward_mean_.cols();
  if (n_s < 1 || n_a < 1) throw std::invalid_argument("MDP needs at least one state and action");
  if (static_cast<Eigen::Index>(transition_.size()) != n_a) {
    throw std::invalid_argument("one transition matrix per action expected");
  }
  if (reward_std_.rows() != n_s || reward_std_.cols() != n_a) {
    throw std::invalid_argument("reward_std shape mismatch");
  }
  if (initial_dist_.size() != n_s) throw std::invalid_argument("initial_dist size mismatch");
  if (!reward_mean_.allFinite()) throw std::invalid_argument("reward_mean must be finite");
  if ((reward_std_.array() < 0.0).any() || !reward_std_.allFinite()) {
    throw std::invalid_argument("reward_std must be finite and nonnegative");
  }
  for (Eigen::Index a = 0; a < n_a; ++a) {
    const Matrix& p = transition_[static_cast<std::size_t>(a)];
    if (p.rows() != n_s || p.cols() != n_s) {
      throw std::invalid_argument("transition matrix shape mismatch");
    }
    for (Eigen::Index s = 0; s < n_s; ++s) {
      check_distribution(p.row(s).transpose(),
                         "transition[s=" + std::to_string(s) + "][a=" + std::to_string(a) + "]");
    }
  }
  check_distribution(initial_dist_, "initial_dist");
}

bool TabularMdp::operator==(const TabularMdp& other) const {
  if (n_states() != other.n_states() || n_actions() != other.n_actions()) return false;
  for (std::size_t a = 0; a < n_actions(); ++a) {
    if (transition_[a] != other.transition_[a]) return false;
  }
  return reward_mean_ == other.reward_mean_ && reward_std_ == other.reward_std_ &&
         initial_dist_ == other.initial_dist_;
}

Policy::Policy(Matrix probs) : probs_(std::move(probs)) {
  if (probs_.rows() < 1 || probs_.cols() < 1) throw std::invalid_argument("empty policy");
  for (Eigen::Index s = 0; s < probs_.rows(); ++s) {
    check_distribution(probs_.row(s).transpose(), "policy row " + std::to_string(s));
  }
}

Policy Policy::uniform(std::size_t n_states, std::size_t n_actions) {
  return Policy(Matrix::Constant(static_cast<Eigen::Index>(n_states),
                                 static_cast<Eigen::Index>(n_actions),
                                 1.0 / static_cast<double>(n_actions)));
}

Policy Policy::deterministic(const std::vector<std::size_t>& actions, std::size_t n_actions) {
  Matrix probs = Matrix::Zero(static_cast<Eigen::Index>(actions.size()),
                              static_cast<Eigen::Index>(n_actions));
  for (std::size_t s = 0; s < actions.size(); ++s) {
    if (actions[s] >= n_actions) throw std::invalid_argument("action index out of range");
    probs(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(actions[s])) = 1.0;
  }
  return Policy(std::move(probs));
}

std::size_t Policy::mode(std::size_t s) const {
  Eigen::Index best = 0;
  probs_.row(static_cast<Eigen::Index>(s)).maxCoeff(&best);
  return static_cast<std::size_t>(best);
}

Matrix induced_chain(const TabularMdp& mdp, const Policy& policy) {
  if (policy.n_states() != mdp.n_states() || policy.n_actions() != mdp.n_actions()) {
    throw std::invalid_argument("policy shape does not match MDP");
  }
  const auto n = static_cast<Eigen::Index>(mdp.n_states());
  Matrix chain = Matrix::Zero(n, n);
  for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
    chain += policy.probs().col(static_cast<Eigen::Index>(a)).asDiagonal() * mdp.transition(a);
  }
  return chain;
}

Vector induced_reward(const TabularMdp& mdp, const Policy& policy) {
  if (policy.n_states() != mdp.n_states() || policy.n_actions() != mdp.n_actions()) {
    throw std::invalid_argument("policy shape does not match MDP");
  }
  return policy.probs().cwiseProduct(mdp.reward_mean()).rowwise().sum();
}

ValueVector exact_value(const TabularMdp& mdp, const Policy& policy, double gamma) {
  check_gamma(gamma);
  const Matrix chain = induced_chain(mdp, policy);
  const Vector reward = induced_reward(mdp, policy);
  const auto n = chain.rows();
  const Matrix system = Matrix::Identity(n, n) - gamma * chain;
  Eigen::PartialPivLU<Matrix> lu(system);
  ValueVector v = lu.solve(reward);
  // One step of iterative refinement keeps the Bellman residual at round-off level for gamma near 1.
  v += lu.solve(reward - system * v);
  if (!v.allFinite()) throw std::runtime_error("policy evaluation system is singular");
  return v;
}

namespace {

QMatrix one_step_q(const TabularMdp& mdp, const ValueVector& v, double gamma) {
  QMatrix q(mdp.reward_mean().rows(), mdp.reward_mean().cols());
  for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
    q.col(static_cast<Eigen::Index>(a)) =
        mdp.reward_mean().col(static_cast<Eigen::Index>(a)) + gamma * mdp.transition(a) * v;
  }
  return q;
}

}  // namespace

QMatrix exact_q(const TabularMdp& mdp, const Policy& policy, double gamma) {
  return one_step_q(mdp, exact_value(mdp, policy, gamma), gamma);
}

ValueVector bellman_optimality(const TabularMdp& mdp, const ValueVector& v, double gamma) {
  return one_step_q(mdp, v, gamma).rowwise().maxCoeff();
}

OptimalSolution optimal_value(const TabularMdp& mdp, double gamma, double tol) {
  check_gamma(gamma);
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  ValueVector v = ValueVector::Zero(static_cast<Eigen::Index>(mdp.n_states()));
  for (;;) {
    ValueVector next = bellman_optimality(mdp, v, gamma);
    const double residual = (next - v).lpNorm<Eigen::Infinity>();
    v = std::move(next);
    if (residual < tol) break;
  }
  // Polish: exact evaluation plus improvement. Each improvement step can only raise the value.
  Policy policy = greedy_policy(one_step_q(mdp, v, gamma));
  for (int iter = 0; iter < 1000; ++iter) {
    const ValueVector exact = exact_value(mdp, policy, gamma);
    const QMatrix q = one_step_q(mdp, exact, gamma);
    // Switch actions only on a strict improvement so ties cannot cycle.
    std::vector<std::size_t> actions(mdp.n_states());
    bool changed = false;
    for (std::size_t s = 0; s < mdp.n_states(); ++s) {
      const auto row = static_cast<Eigen::Index>(s);
      const std::size_t current = policy.mode(s);
      Eigen::Index best = 0;
      const double best_q = q.row(row).maxCoeff(&best);
      const double scale = std::max(1.0, std::abs(best_q));
      if (best_q > q(row, static_cast<Eigen::Index>(current)) + 1e-13 * scale) {
        actions[s] = static_cast<std::size_t>(best);
        changed = true;
      } else {
        actions[s] = current;
      }
    }
    v = exact;
    if (!changed) break;
    policy = Policy::deterministic(actions, mdp.n_actions());
  }
  return {std::move(v), std::move(policy)};
}

Policy greedy_policy(const QMatrix& q) {
  std::vector<std::size_t> actions(static_cast<std::size_t>(q.rows()));
  for (Eigen::Index s = 0; s < q.rows(); ++s) {
    Eigen::Index best = 0;
    for (Eigen::Index a = 1; a < q.cols(); ++a) {
      if (q(s, a) > q(s, best)) best = a;
    }
    actions[static_cast<std::size_t>(s)] = static_cast<std::size_t>(best);
  }
  return Policy::deterministic(actions, static_cast<std::size_t>(q.cols()));
}

Policy epsilon_greedy(const Policy& base, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
  const double uniform = 1.0 / static_cast<double>(base.n_actions());
  Matrix probs = (1.0 - epsilon) * base.probs();
  probs.array() += epsilon * uniform;
  return Policy(std::move(probs));
}

namespace {

nlohmann::json matrix_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols,
                        const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw std::invalid_argument(std::string("bad shape for ") + what);
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw std::invalid_argument(std::string("bad shape for ") + what);
    }
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

}  // namespace

std::string mdp_to_json(const TabularMdp& mdp) {
  nlohmann::json j;
  j["n_states"] = mdp.n_states();
  j["n_actions"] = mdp.n_actions();
  // transition[s][a][s'] ordering.
  auto transition = nlohmann::json::array();
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    auto per_action = nlohmann::json::array();
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      auto row = nlohmann::json::array();
      for (std::size_t t = 0; t < mdp.n_states(); ++t) row.push_back(mdp.transition(s, a, t));
      per_action.push_back(std::move(row));
    }
    transition.push_back(std::move(per_action));
  }
  j["transition"] = std::move(transition);
  j["reward_mean"] = matrix_json(mdp.reward_mean());
  j["reward_std"] = matrix_json(mdp.reward_std());
  j["initial_dist"] = std::vector<double>(mdp.initial_dist().data(),
                                          mdp.initial_dist().data() + mdp.initial_dist().size());
  return j.dump(1);
}

TabularMdp mdp_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const auto n_s = j.at("n_states").get<Eigen::Index>();
  const auto n_a = j.at("n_actions").get<Eigen::Index>();
  if (n_s < 1 || n_a < 1) throw std::invalid_argument("n_states and n_actions must be positive");
  const auto& tj = j.at("transition");
  if (!tj.is_array() || static_cast<Eigen::Index>(tj.size()) != n_s) {
    throw std::invalid_argument("bad shape for transition");
  }
  std::vector<Matrix> transition(static_cast<std::size_t>(n_a), Matrix(n_s, n_s));
  for (Eigen::Index s = 0; s < n_s; ++s) {
    const Matrix rows = matrix_from_json(tj[static_cast<std::size_t>(s)], n_a, n_s, "transition");
    for (Eigen::Index a = 0; a < n_a; ++a) transition[static_cast<std::size_t>(a)].row(s) = rows.row(a);
  }
  const auto init = j.at("initial_dist").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(init.size()) != n_s) throw std::invalid_argument("bad initial_dist");
  return TabularMdp(std::move(transition), matrix_from_json(j.at("reward_mean"), n_s, n_a, "reward_mean"),
                    matrix_from_json(j.at("reward_std"), n_s, n_a, "reward_std"),
                    Eigen::Map<const Vector>(init.data(), n_s));
}

void save_mdp(const TabularMdp& mdp, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << mdp_to_json(mdp) << '\n';
}

TabularMdp load_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return mdp_from_json(buffer.str());
}

}  // namespace discreg
