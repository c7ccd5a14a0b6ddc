#include "discreg/verify.hpp"

#include <algorithm>
#include <limits>

#include "discreg/env_gen.hpp"
#include "discreg/lstd.hpp"
#include "discreg/td.hpp"

namespace discreg {

namespace {

constexpr double kGammas[] = {0.3, 0.7, 0.9};

Policy random_policy(std::size_t n_states, std::size_t n_actions, Rng& rng) {
  Matrix probs(static_cast<Eigen::Index>(n_states), static_cast<Eigen::Index>(n_actions));
  for (std::size_t s = 0; s < n_states; ++s) {
    probs.row(static_cast<Eigen::Index>(s)) = sample_dirichlet(rng, n_actions, 1.0).transpose();
  }
  return Policy(std::move(probs));
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = sample_uniform(rng, -1.0, 1.0);
  return out;
}

}  // namespace

EquivalenceReport run_equivalence_suite(const EquivalenceSettings& settings) {
  EquivalenceReport report;
  report.negative_control = std::numeric_limits<double>::infinity();
  const double ge = settings.gamma_eval;
  const std::size_t traj_len = 10;
  const std::size_t n_traj = std::max<std::size_t>(1, settings.dataset_size / traj_len);

  for (std::size_t trial = 0; trial < settings.trials; ++trial) {
    Rng rng(combine_seed({settings.seed, trial}));
    const TabularMdp mdp = gridworld(GridSpec{}, rng);
    const std::size_t nS = mdp.n_states(), nA = mdp.n_actions();
    const Policy behavior = random_policy(nS, nA, rng);
    const TransitionDataset data = collect_trajectories(mdp, behavior, n_traj, traj_len, rng);
    const FeatureMap v_features = FeatureMap::tabular(nS);
    const FeatureMap q_features = FeatureMap::tabular(nS, nA);
    const Policy target = random_policy(nS, nA, rng);
    const auto indices = sample_indices(data.size(), settings.iterations, rng);
    const Vector v0 = random_matrix(static_cast<Eigen::Index>(nS), 1, rng);
    const Vector q0 = random_matrix(static_cast<Eigen::Index>(nS * nA), 1, rng);

    for (double g : kGammas) {
      report.prop1 = std::max(report.prop1, verify_prop1(data, v_features, ge, g, v0, indices));
      report.prop2_expected_sarsa = std::max(
          report.prop2_expected_sarsa, verify_prop2(data, target, q_features, ge, g, q0, indices));
      report.prop2_sarsa =
          std::max(report.prop2_sarsa, verify_prop2(data, target, q_features, ge, g, q0, indices,
                                                    default_learning_rate, 1.0, QTarget::kSarsa));
      double control = std::min(
          verify_prop1(data, v_features, ge, g, v0, indices, default_learning_rate,
                       settings.perturbation),
          verify_prop2(data, target, q_features, ge, g, q0, indices, default_learning_rate,
                       settings.perturbation));
      for (std::size_t m : {2, 3}) {
        const auto segments = extract_segments(data, m);
        const auto seg_indices = sample_indices(segments.size(), settings.iterations, rng);
        report.prop3 = std::max(
            report.prop3, verify_prop3(segments, v_features, ge, g, m, v0, seg_indices));
        control = std::min(control, verify_prop3(segments, v_features, ge, g, m, v0, seg_indices,
                                                 default_learning_rate, settings.perturbation));
      }
      report.negative_control = std::min(report.negative_control, control);
    }

    // Decomposition over random dense features and a random gamma <= gamma_eval.
    const auto dim = static_cast<Eigen::Index>(2 + trial % 15);
    const FeatureMap dense(random_matrix(static_cast<Eigen::Index>(nS), dim, rng), nS);
    const double g = sample_uniform(rng, 0.0, ge);
    const LstdDecomposition parts = lstd_decompose(data, dense, g, ge);
    const Matrix direct = lstd_system(data, dense, g, 0.0).a;
    report.lstd_decomposition =
        std::max(report.lstd_decomposition,
                 (direct - (parts.high_discount + (ge - g) * parts.cross)).cwiseAbs().maxCoeff());
    ++report.trials;
  }
  if (report.trials == 0) report.negative_control = 0.0;
  return report;
}

}  // namespace discreg
