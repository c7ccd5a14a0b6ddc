#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "discreg/env_gen.hpp"
#include "discreg/td.hpp"
#include "test_helpers.hpp"

using namespace discreg;
using discreg::testing::cycle_mdp;
using discreg::testing::make_dataset;
using discreg::testing::random_policy;

namespace {

RegConfig plain(double gamma, LrSchedule lr = default_learning_rate, std::size_t n_iter = 5000) {
  RegConfig c;
  c.gamma = gamma;
  c.gamma_eval = gamma;
  c.lr = std::move(lr);
  c.n_iter = n_iter;
  return c;
}

LrSchedule constant(double a) {
  return [a](std::size_t) { return a; };
}

// Two states, action 0 switches state, action 1 stays; reward mean 0 in s0 and 1 in s1.
TabularMdp switch_stay_mdp() {
  Matrix sw(2, 2), st(2, 2);
  sw << 0, 1, 1, 0;
  st << 1, 0, 0, 1;
  Matrix r(2, 2);
  r << 0, 0, 1, 1;
  return TabularMdp({sw, st}, r, Matrix::Zero(2, 2), Vector::Constant(2, 0.5));
}

TransitionDataset exhaustive(const TabularMdp& mdp) {
  std::vector<Transition> ts;
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      for (std::size_t s2 = 0; s2 < mdp.n_states(); ++s2) {
        if (mdp.transition(s, a, s2) > 0) {
          ts.push_back({s, a, mdp.reward_mean()(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)), s2, std::nullopt});
        }
      }
    }
  }
  return make_dataset(ts);
}

double max_log_gap(const IterateLog& a, const IterateLog& b) {
  EXPECT_EQ(a.iterates.size(), b.iterates.size());
  double gap = 0.0;
  for (std::size_t i = 0; i < a.iterates.size(); ++i) {
    gap = std::max(gap, (a.iterates[i] - b.iterates[i]).lpNorm<Eigen::Infinity>());
  }
  return gap;
}

}  // namespace

TEST(EquivalenceParams, Examples) {
  const auto id = equivalence_params(0.99, 0.99, 1);
  EXPECT_EQ(id.lambda, 0.0);
  EXPECT_EQ(id.xi, 1.0);
  EXPECT_EQ(id.lr_scale, 1.0);
  const auto p1 = equivalence_params(0.99, 0.9, 1);
  EXPECT_NEAR(p1.lambda, 0.05, 1e-15);
  EXPECT_NEAR(p1.xi, 1.1, 1e-15);
  EXPECT_NEAR(p1.lr_scale, 0.9 / 0.99, 1e-15);
  const auto p3 = equivalence_params(1.0, 0.5, 2);
  EXPECT_NEAR(p3.lambda, 1.5, 1e-15);
  EXPECT_NEAR(p3.xi, 4.0, 1e-15);
  EXPECT_NEAR(p3.lr_scale, 0.25, 1e-15);
  EXPECT_THROW(equivalence_params(0.99, 0.0, 1), std::domain_error);
  EXPECT_THROW(equivalence_params(0.9, 0.99, 1), std::domain_error);
}

TEST(EquivalenceParams, Identities) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double ge = sample_uniform(rng, 0.05, 1.0);
    const double g = sample_uniform(rng, 0.01, ge);
    const std::size_t m = 1 + static_cast<std::size_t>(i % 4);
    const auto p = equivalence_params(ge, g, m);
    EXPECT_NEAR(p.xi, std::pow(ge, m) / std::pow(g, m), 1e-12 * p.xi);
    EXPECT_NEAR(p.lr_scale, 1.0 / p.xi, 1e-15);
    EXPECT_NEAR(p.lambda, (p.xi - 1.0) / 2.0, 1e-12 * p.xi);
  }
}

TEST(Td0, OneStepArithmetic) {
  const auto data = make_dataset({{0, 0, 1.0, 1, std::nullopt}});
  const std::vector<std::size_t> idx = {0};
  const Vector theta = td0_run(data, FeatureMap::tabular(3), plain(0.5, constant(0.1)),
                               Vector::Zero(3), idx);
  EXPECT_DOUBLE_EQ(theta[0], 0.1);
  EXPECT_EQ(theta[1], 0.0);
  EXPECT_EQ(theta[2], 0.0);
}

TEST(Td0, ConvergesOnTwoStateCycle) {
  const auto mdp = cycle_mdp({0.0, 1.0});
  const auto data = make_dataset({{0, 0, 0.0, 1, std::nullopt}, {1, 0, 1.0, 0, std::nullopt}});
  Rng rng(2);
  const Vector theta =
      td0_batch(data, FeatureMap::tabular(2), plain(0.5, default_learning_rate, 100000),
                Vector::Zero(2), rng);
  EXPECT_NEAR(theta[0], 2.0 / 3.0, 0.02);
  EXPECT_NEAR(theta[1], 4.0 / 3.0, 0.02);
}

TEST(Td0, StrongActivationPinsToZero) {
  const auto data = make_dataset({{0, 0, 1.0, 1, std::nullopt}, {1, 0, 1.0, 0, std::nullopt}});
  RegConfig c = plain(0.5, constant(1e-4), 10000);
  c.reg = Regularizer::activation(1e3);
  Rng rng(3);
  const Vector theta = td0_batch(data, FeatureMap::tabular(2), c, Vector::Zero(2), rng);
  EXPECT_LT(theta.lpNorm<Eigen::Infinity>(), 1e-3);
}

TEST(Td0, SemiGradientTouchesOnlySampledCoordinate) {
  const auto data = make_dataset({{2, 0, 0.3, 1, std::nullopt}});
  const std::vector<std::size_t> idx = {0};
  Vector theta0(4);
  theta0 << 0.5, -1.0, 2.0, 0.25;
  RegConfig c = plain(0.9, constant(0.2));
  const Vector t1 = td0_run(data, FeatureMap::tabular(4), c, theta0, idx);
  EXPECT_EQ(t1[0], theta0[0]);
  EXPECT_EQ(t1[1], theta0[1]);
  EXPECT_EQ(t1[3], theta0[3]);
  EXPECT_NE(t1[2], theta0[2]);
  c.reg = Regularizer::l2(0.1);
  const Vector t2 = td0_run(data, FeatureMap::tabular(4), c, theta0, idx);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NE(t2[i], theta0[i]);
}

TEST(Td0, ActivationLeavesUnvisitedStatesAlone) {
  const auto data = make_dataset({{0, 0, 0.0, 1, std::nullopt}, {1, 0, 0.0, 0, std::nullopt}});
  Vector theta0(4);
  theta0 << 1.0, 1.0, 5.0, -5.0;
  RegConfig c = plain(0.9, constant(0.01), 20000);
  c.gamma_eval = 0.9;
  c.reg = Regularizer::activation(20.0);
  Rng rng(4);
  const Vector theta = td0_batch(data, FeatureMap::tabular(4), c, theta0, rng);
  EXPECT_LT(theta.head(2).lpNorm<Eigen::Infinity>(), 1e-6);
  EXPECT_EQ(theta[2], 5.0);
  EXPECT_EQ(theta[3], -5.0);
}

TEST(Td0, InputErrors) {
  Rng rng(5);
  const auto data = make_dataset({{0, 0, 0.0, 1, std::nullopt}});
  EXPECT_THROW(td0_batch(make_dataset({}), FeatureMap::tabular(2), plain(0.5), Vector::Zero(2), rng),
               std::invalid_argument);
  EXPECT_THROW(td0_batch(data, FeatureMap::tabular(2), plain(0.5), Vector::Zero(3), rng),
               std::invalid_argument);
  RegConfig bad = plain(0.5);
  bad.gamma_eval = 0.4;
  EXPECT_THROW(td0_batch(data, FeatureMap::tabular(2), bad, Vector::Zero(2), rng),
               std::invalid_argument);
}

TEST(ExpectedSarsa, DeterministicPolicyMatchesSarsa) {
  Rng rng(6);
  const auto mdp = gridworld(GridSpec{}, rng);
  std::vector<std::size_t> actions(16);
  for (auto& a : actions) a = static_cast<std::size_t>(sample_uniform(rng, 0.0, 5.0));
  const auto pi = Policy::deterministic(actions, 5);
  const auto data = collect_trajectories(mdp, pi, 4, 20, rng);
  const auto features = FeatureMap::tabular(16, 5);
  const auto idx = sample_indices(data.size(), 500, rng);
  const Vector q0 = Vector::Zero(80);
  IterateLog a, b;
  expected_sarsa_run(data, pi, features, plain(0.9), q0, idx, &a);
  sarsa_run(data, features, plain(0.9), q0, idx, &b);
  EXPECT_EQ(max_log_gap(a, b), 0.0);
}

TEST(ExpectedSarsa, ConvergesToExactQ) {
  const auto mdp = switch_stay_mdp();
  const auto pi = Policy::uniform(2, 2);
  Rng rng(7);
  const Vector theta = expected_sarsa_batch(exhaustive(mdp), pi, FeatureMap::tabular(2, 2),
                                            plain(0.5, default_learning_rate, 100000),
                                            Vector::Zero(4), rng);
  const Matrix q = FeatureMap::tabular(2, 2).q_values(theta);
  EXPECT_LT((q - exact_q(mdp, pi, 0.5)).cwiseAbs().maxCoeff(), 0.02);
  const Vector v = q.cwiseProduct(pi.probs()).rowwise().sum();
  EXPECT_LT((v - exact_value(mdp, pi, 0.5)).lpNorm<Eigen::Infinity>(), 0.02);
}

TEST(ExpectedSarsa, ZeroDiscountGivesEmpiricalMeans) {
  Rng rng(8);
  const auto mdp = gridworld(GridSpec{}, rng);
  const auto pi = Policy::uniform(16, 5);
  const auto data = collect_trajectories(mdp, pi, 10, 30, rng);
  Vector sum = Vector::Zero(80), count = Vector::Zero(80);
  for (const auto& t : data.transitions) {
    sum[static_cast<Eigen::Index>(t.s * 5 + t.a)] += t.r;
    count[static_cast<Eigen::Index>(t.s * 5 + t.a)] += 1.0;
  }
  RegConfig c = plain(0.0, default_learning_rate, 200000);
  c.gamma_eval = 0.99;
  const Vector theta =
      expected_sarsa_batch(data, pi, FeatureMap::tabular(16, 5), c, Vector::Zero(80), rng);
  const Vector sarsa = sarsa_batch(data, FeatureMap::tabular(16, 5), c, Vector::Zero(80), rng);
  for (Eigen::Index i = 0; i < 80; ++i) {
    if (count[i] == 0) continue;
    EXPECT_NEAR(theta[i], sum[i] / count[i], 0.02);
    EXPECT_NEAR(sarsa[i], sum[i] / count[i], 0.02);
  }
}

TEST(Sarsa, ConvergesOnDeterministicLoop) {
  // Deterministic policy on the switch/stay MDP: SARSA targets become exact.
  const auto mdp = switch_stay_mdp();
  const auto pi = Policy::deterministic({0, 0}, 2);
  Rng rng(9);
  const auto data = collect_trajectories(mdp, pi, 1, 50, rng);
  const Vector theta = sarsa_batch(data, FeatureMap::tabular(2, 2),
                                   plain(0.5, default_learning_rate, 100000), Vector::Zero(4), rng);
  const Matrix q = exact_q(mdp, pi, 0.5);
  EXPECT_NEAR(theta[0], q(0, 0), 0.02);
  EXPECT_NEAR(theta[2], q(1, 0), 0.02);
}

TEST(Sarsa, NeedsNextAction) {
  Rng rng(10);
  const auto data = make_dataset({{0, 0, 0.0, 1, std::nullopt}});
  EXPECT_THROW(sarsa_batch(data, FeatureMap::tabular(2, 2), plain(0.5), Vector::Zero(4), rng),
               std::invalid_argument);
}

TEST(MStep, ReducesToTd0) {
  Rng rng(11);
  const auto mdp = gridworld(GridSpec{}, rng);
  const auto data = collect_trajectories(mdp, Policy::uniform(16, 5), 3, 20, rng);
  const auto segs = extract_segments(data, 1);
  ASSERT_EQ(segs.size(), data.size());
  const auto idx = sample_indices(data.size(), 300, rng);
  IterateLog a, b;
  td0_run(data, FeatureMap::tabular(16), plain(0.8), Vector::Zero(16), idx, &a);
  m_step_td_run(segs, FeatureMap::tabular(16), plain(0.8), 1, Vector::Zero(16), idx, &b);
  EXPECT_EQ(max_log_gap(a, b), 0.0);
}

TEST(MStep, TwoStepArithmetic) {
  const std::vector<Segment> segs = {{0, {1.0, 1.0}, 1}};
  const std::vector<std::size_t> idx = {0};
  const Vector theta =
      m_step_td_run(segs, FeatureMap::tabular(2), plain(0.5, constant(0.1)), 2, Vector::Zero(2), idx);
  EXPECT_NEAR(theta[0], 0.15, 1e-15);
  EXPECT_EQ(theta[1], 0.0);
  const std::vector<Segment> wrong = {{0, {1.0}, 1}};
  EXPECT_THROW(m_step_td_run(wrong, FeatureMap::tabular(2), plain(0.5), 2, Vector::Zero(2), idx),
               std::invalid_argument);
}

TEST(MStep, ConvergesOnTwoStateCycle) {
  const auto mdp = cycle_mdp({0.0, 1.0});
  Rng rng(12);
  const auto data = collect_trajectories(mdp, Policy::uniform(2, 1), 4, 10, rng);
  const auto segs = extract_segments(data, 2);
  const Vector theta = m_step_td_batch(segs, FeatureMap::tabular(2),
                                       plain(0.5, default_learning_rate, 100000), 2,
                                       Vector::Zero(2), rng);
  EXPECT_LT((theta - exact_value(mdp, Policy::uniform(2, 1), 0.5)).lpNorm<Eigen::Infinity>(), 0.02);
}

class PropositionTest : public ::testing::Test {
 protected:
  void SetUp() override {
    Rng rng(13);
    mdp_.emplace(gridworld(GridSpec{}, rng));
    pi_.emplace(random_policy(16, 5, rng));
    data_ = collect_trajectories(*mdp_, *pi_, 5, 10, rng);
    idx_ = sample_indices(data_.size(), 200, rng);
    v0_ = Vector::LinSpaced(16, -1.0, 1.0);
    q0_ = Vector::LinSpaced(80, -1.0, 1.0);
  }
  std::optional<TabularMdp> mdp_;
  std::optional<Policy> pi_;
  TransitionDataset data_;
  std::vector<std::size_t> idx_;
  Vector v0_, q0_;
};

TEST_F(PropositionTest, Prop1) {
  const auto f = FeatureMap::tabular(16);
  EXPECT_EQ(verify_prop1(data_, f, 0.99, 0.99, v0_, idx_), 0.0);
  for (double g : {0.3, 0.7, 0.9}) {
    EXPECT_LT(verify_prop1(data_, f, 0.99, g, v0_, idx_), 1e-9);
    EXPECT_GT(verify_prop1(data_, f, 0.99, g, v0_, idx_, default_learning_rate, 1.1), 1e-4);
  }
}

TEST_F(PropositionTest, Prop1DenseFeatures) {
  Rng rng(14);
  Matrix table(16, 6);
  for (Eigen::Index i = 0; i < table.size(); ++i) table.data()[i] = sample_uniform(rng, -0.3, 0.3);
  const FeatureMap f(table, 16);
  EXPECT_LT(verify_prop1(data_, f, 0.99, 0.7, Vector::Zero(6), idx_, constant(0.05)), 1e-9);
}

TEST_F(PropositionTest, Prop2) {
  const auto f = FeatureMap::tabular(16, 5);
  EXPECT_EQ(verify_prop2(data_, *pi_, f, 0.99, 0.99, q0_, idx_), 0.0);
  for (double g : {0.3, 0.7, 0.9}) {
    EXPECT_LT(verify_prop2(data_, *pi_, f, 0.99, g, q0_, idx_), 1e-9);
    EXPECT_LT(verify_prop2(data_, *pi_, f, 0.99, g, q0_, idx_, default_learning_rate, 1.0,
                           QTarget::kSarsa),
              1e-9);
    EXPECT_GT(verify_prop2(data_, *pi_, f, 0.99, g, q0_, idx_, default_learning_rate, 1.1), 1e-4);
  }
}

TEST_F(PropositionTest, Prop3) {
  const auto f = FeatureMap::tabular(16);
  for (std::size_t m : {2, 3}) {
    const auto segs = extract_segments(data_, m);
    Rng rng(15);
    const auto idx = sample_indices(segs.size(), 200, rng);
    EXPECT_EQ(verify_prop3(segs, f, 0.99, 0.99, m, v0_, idx), 0.0);
    for (double g : {0.3, 0.7, 0.9}) {
      EXPECT_LT(verify_prop3(segs, f, 0.99, g, m, v0_, idx), 1e-9);
      EXPECT_GT(verify_prop3(segs, f, 0.99, g, m, v0_, idx, default_learning_rate, 1.1), 1e-4);
    }
  }
}

TEST(ActivationTerm, Examples) {
  std::vector<Transition> ts;
  for (std::size_t s = 0; s < 4; ++s) ts.push_back({s, 0, 0.0, s, std::nullopt});
  const auto data = make_dataset(ts);
  Vector theta(4);
  theta << 1, -2, 0.5, 3;
  EXPECT_NEAR(activation_term(FeatureMap::tabular(4), data, theta, 0.3),
              0.3 / 4 * theta.squaredNorm(), 1e-14);
  EXPECT_EQ(activation_term(FeatureMap::tabular(4), data, Vector::Zero(4), 0.3), 0.0);

  Rng rng(16);
  Matrix table(4, 3);
  for (Eigen::Index i = 0; i < table.size(); ++i) table.data()[i] = sample_uniform(rng, -1, 1);
  const FeatureMap f(table, 4);
  const Vector th = Vector::LinSpaced(3, -1.0, 2.0);
  const Matrix lambda_mat = feature_second_moment(f, data);
  EXPECT_NEAR(activation_term(f, data, th, 0.7), 0.7 * th.dot(lambda_mat * th), 1e-12);
}

TEST(IterateLog, CsvDump) {
  IterateLog log;
  log.iterates = {Vector::Zero(2), Vector::Ones(2)};
  const std::string path = ::testing::TempDir() + "iterates.csv";
  save_iterate_log_csv(log, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "iteration,param,value");
}
