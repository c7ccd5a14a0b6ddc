#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "discreg/mdp.hpp"
#include "discreg/metrics.hpp"
#include "discreg/random.hpp"

using namespace discreg;

namespace {

// O(n^2) pair counting.
double tau_b_bruteforce(const Vector& x, const Vector& y) {
  long long concordant = 0, discordant = 0, tie_x = 0, tie_y = 0;
  const auto n = x.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0 && dy == 0) {
        ++tie_x;
        ++tie_y;
      } else if (dx == 0) {
        ++tie_x;
      } else if (dy == 0) {
        ++tie_y;
      } else if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const long long n0 = static_cast<long long>(n) * (n - 1) / 2;
  if (n0 == tie_x || n0 == tie_y) return std::nan("");
  return static_cast<double>(concordant - discordant) / std::sqrt(static_cast<double>(n0 - tie_x)) /
         std::sqrt(static_cast<double>(n0 - tie_y));
}

Vector random_vector(Rng& rng, Eigen::Index n, bool ties) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v[i] = ties ? std::floor(sample_uniform(rng, 0.0, 4.0)) : sample_uniform(rng, -1.0, 1.0);
  }
  return v;
}

}  // namespace

TEST(L2ValueLoss, Examples) {
  Vector a(2), b(2);
  a << 1, 2;
  b << 1, 0;
  EXPECT_EQ(l2_value_loss(a, a), 0.0);
  EXPECT_DOUBLE_EQ(l2_value_loss(a, b), 2.0);
  EXPECT_DOUBLE_EQ(l2_value_loss(-3.0 * a, -3.0 * b), 6.0);
  EXPECT_THROW(l2_value_loss(a, Vector::Zero(3)), std::invalid_argument);
}

TEST(RankingLoss, Examples) {
  Vector a(4), rev(4);
  a << 1, 2, 3, 4;
  rev << 4, 3, 2, 1;
  EXPECT_DOUBLE_EQ(ranking_loss(a, a), -1.0);
  EXPECT_DOUBLE_EQ(ranking_loss(rev, a), 1.0);
  EXPECT_TRUE(std::isnan(ranking_loss(Vector::Constant(4, 2.0), a)));
}

TEST(RankingLoss, MatchesBruteForceOnRandomVectors) {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index n = 8;
    const bool ties = trial % 2 == 0;
    const Vector x = random_vector(rng, n, ties), y = random_vector(rng, n, ties);
    const double oracle = tau_b_bruteforce(x, y);
    if (std::isnan(oracle)) {
      EXPECT_TRUE(std::isnan(kendall_tau_b(x, y)));
    } else {
      EXPECT_EQ(kendall_tau_b(x, y), oracle);
    }
  }
}

TEST(RankingLoss, MonotoneTransformInvariance) {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector x = random_vector(rng, 10, trial % 2 == 0), y = random_vector(rng, 10, false);
    const Vector fx = (x.array() * 3.0).exp();
    const Vector gy = y.array().cube() - 5.0;
    EXPECT_DOUBLE_EQ(ranking_loss(fx, gy), ranking_loss(x, y));
  }
}

TEST(TvDistance, Examples) {
  const Vector u = Vector::Constant(16, 1.0 / 16);
  Vector point = Vector::Zero(16);
  point[3] = 1.0;
  EXPECT_EQ(tv_distance(u, u), 0.0);
  EXPECT_DOUBLE_EQ(tv_distance(point, u), 0.9375);
  EXPECT_DOUBLE_EQ(tv_distance(u, point), tv_distance(point, u));
}

TEST(TvDistance, TriangleInequality) {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector p = sample_dirichlet(rng, 6, 0.5), q = sample_dirichlet(rng, 6, 0.5),
                 r = sample_dirichlet(rng, 6, 0.5);
    EXPECT_LE(tv_distance(p, r), tv_distance(p, q) + tv_distance(q, r) + 1e-15);
  }
}

TEST(MeanCi, Examples) {
  const std::vector<double> constant(7, 3.25);
  const auto c = mean_ci(constant);
  EXPECT_EQ(c.mean, 3.25);
  EXPECT_EQ(c.low, 3.25);
  EXPECT_EQ(c.high, 3.25);

  const std::vector<double> two = {0.0, 2.0};
  const auto t = mean_ci(two);
  EXPECT_DOUBLE_EQ(t.mean, 1.0);
  EXPECT_NEAR(t.high - t.mean, 12.706204736174698, 1e-9);
  EXPECT_NEAR(t.mean - t.low, 12.706204736174698, 1e-9);

  const std::vector<double> one = {4.0};
  const auto o = mean_ci(one);
  EXPECT_EQ(o.low, 4.0);
  EXPECT_EQ(o.high, 4.0);
}

TEST(MeanCi, WidthShrinksLikeInverseSqrtN) {
  Rng rng(14);
  std::vector<double> samples;
  for (int i = 0; i < 6400; ++i) samples.push_back(sample_normal(rng, 0.0, 1.0));
  const auto w = [&](std::size_t n) {
    const auto ci = mean_ci(std::span<const double>(samples.data(), n));
    EXPECT_LE(ci.low, ci.mean);
    EXPECT_LE(ci.mean, ci.high);
    return ci.high - ci.low;
  };
  // Quadrupling n halves the width, up to sampling noise of the std estimate.
  EXPECT_NEAR(w(400) / w(1600), 2.0, 0.2);
  EXPECT_NEAR(w(1600) / w(6400), 2.0, 0.2);
}
