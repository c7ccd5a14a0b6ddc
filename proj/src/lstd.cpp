#include "discreg/lstd.hpp"

#include <string>

namespace discreg {
namespace {

void check_inputs(const TransitionDataset& dataset, double gamma, double lambda_l2) {
  if (dataset.empty()) throw std::invalid_argument("LSTD needs a nonempty dataset");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("discount must lie in [0, 1]");
  if (!(lambda_l2 >= 0.0)) throw std::invalid_argument("ridge factor must be nonnegative");
}

}  // namespace

LstdSystem lstd_system(const TransitionDataset& dataset, const FeatureMap& features, double gamma,
                       double lambda_l2) {
  check_inputs(dataset, gamma, lambda_l2);
  if (features.state_action()) throw std::invalid_argument("LSTD needs state features");
  const auto k = static_cast<Eigen::Index>(features.dimension());
  LstdSystem sys{Matrix::Zero(k, k), Vector::Zero(k), dataset.size()};
  for (const auto& t : dataset.transitions) {
    const auto phi = features.evaluate(t.s);
    const auto phi_next = features.evaluate(t.s_next);
    sys.a.noalias() += phi.transpose() * (phi - gamma * phi_next);
    sys.b += t.r * phi.transpose();
  }
  const double inv_n = 1.0 / static_cast<double>(dataset.size());
  sys.a *= inv_n;
  sys.b *= inv_n;
  sys.a.diagonal().array() += lambda_l2;
  return sys;
}

LstdSystem lstdq_system(const TransitionDataset& dataset, const FeatureMap& sa_features,
                        const Policy& policy, double gamma, double lambda_l2) {
  check_inputs(dataset, gamma, lambda_l2);
  if (policy.n_states() != sa_features.n_states() || policy.n_actions() != sa_features.n_actions()) {
    throw std::invalid_argument("policy does not match the state-action feature domain");
  }
  const auto k = static_cast<Eigen::Index>(sa_features.dimension());
  LstdSystem sys{Matrix::Zero(k, k), Vector::Zero(k), dataset.size()};
  Eigen::RowVectorXd phi_next(k);
  for (const auto& t : dataset.transitions) {
    const auto phi = sa_features.evaluate(t.s, t.a);
    phi_next.setZero();
    for (std::size_t a = 0; a < sa_features.n_actions(); ++a) {
      const double p = policy.prob(t.s_next, a);
      if (p != 0.0) phi_next += p * sa_features.evaluate(t.s_next, a);
    }
    sys.a.noalias() += phi.transpose() * (phi - gamma * phi_next);
    sys.b += t.r * phi.transpose();
  }
  const double inv_n = 1.0 / static_cast<double>(dataset.size());
  sys.a *= inv_n;
  sys.b *= inv_n;
  sys.a.diagonal().array() += lambda_l2;
  return sys;
}

Vector solve_lstd(const LstdSystem& system) {
  Eigen::FullPivLU<Matrix> lu(system.a);
  // Relative pivot threshold; rank deficiency from unvisited features shows up as exact zero pivots.
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) {
    throw SingularSystemError(
        "LSTD matrix is singular (rank " + std::to_string(lu.rank()) + " of " +
        std::to_string(system.a.rows()) +
        "); add a positive ridge factor or collect data covering every feature");
  }
  Vector theta = lu.solve(system.b);
  theta += lu.solve(system.b - system.a * theta);
  if (!theta.allFinite()) throw SingularSystemError("LSTD solve produced non-finite parameters");
  return theta;
}

Vector lstd(const TransitionDataset& dataset, const FeatureMap& features, double gamma,
            double lambda_l2) {
  return solve_lstd(lstd_system(dataset, features, gamma, lambda_l2));
}

Vector lstdq(const TransitionDataset& dataset, const FeatureMap& sa_features, const Policy& policy,
             double gamma, double lambda_l2) {
  return solve_lstd(lstdq_system(dataset, sa_features, policy, gamma, lambda_l2));
}

LstdDecomposition lstd_decompose(const TransitionDataset& dataset, const FeatureMap& features,
                                 double gamma, double gamma_eval) {
  check_inputs(dataset, gamma, 0.0);
  if (!(gamma <= gamma_eval && gamma_eval <= 1.0)) {
    throw std::invalid_argument("need gamma <= gamma_eval <= 1");
  }
  const auto k = static_cast<Eigen::Index>(features.dimension());
  LstdDecomposition out{Matrix::Zero(k, k), Matrix::Zero(k, k)};
  for (const auto& t : dataset.transitions) {
    const auto phi = features.state_action() ? features.evaluate(t.s, t.a) : features.evaluate(t.s);
    if (features.state_action() && !t.a_next) {
      throw std::invalid_argument("state-action decomposition needs transitions with a_next");
    }
    const auto phi_next = features.state_action() ? features.evaluate(t.s_next, *t.a_next)
                                                  : features.evaluate(t.s_next);
    out.high_discount.noalias() += phi.transpose() * (phi - gamma_eval * phi_next);
    out.cross.noalias() += phi.transpose() * phi_next;
  }
  const double inv_n = 1.0 / static_cast<double>(dataset.size());
  out.high_discount *= inv_n;
  out.cross *= inv_n;
  return out;
}

}  // namespace discreg
