#include "discreg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace discreg {

double l2_value_loss(const Eigen::Ref<const Eigen::VectorXd>& v_hat,
                     const Eigen::Ref<const Eigen::VectorXd>& v_true) {
  if (v_hat.size() != v_true.size()) throw std::invalid_argument("value vectors differ in size");
  return (v_hat - v_true).norm();
}

namespace {

// Number of pairs tied within runs of equal keys of an already sorted sequence.
template <typename Equal>
std::int64_t tied_pairs(std::size_t n, Equal equal) {
  std::int64_t ties = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && equal(i - 1, i)) {
      ++run;
    } else {
      ties += static_cast<std::int64_t>(run) * static_cast<std::int64_t>(run - 1) / 2;
      run = 1;
    }
  }
  return ties;
}

// Stable merge sort of ys counting the number of inversions (swaps).
std::int64_t merge_count(std::vector<double>& ys, std::vector<double>& buffer, std::size_t lo,
                         std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = merge_count(ys, buffer, lo, mid) + merge_count(ys, buffer, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (ys[j] < ys[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buffer[k++] = ys[j++];
    } else {
      buffer[k++] = ys[i++];
    }
  }
  while (i < mid) buffer[k++] = ys[i++];
  while (j < hi) buffer[k++] = ys[j++];
  std::copy(buffer.begin() + static_cast<std::ptrdiff_t>(lo),
            buffer.begin() + static_cast<std::ptrdiff_t>(hi),
            ys.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

// Knight's O(n log n) algorithm.
double kendall_tau_b(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("rank vectors differ in size");
  const auto n = static_cast<std::size_t>(x.size());
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
    return x[ia] < x[ib] || (x[ia] == x[ib] && y[ia] < y[ib]);
  });
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[static_cast<Eigen::Index>(order[i])];
    ys[i] = y[static_cast<Eigen::Index>(order[i])];
  }

  const std::int64_t total = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const std::int64_t x_ties = tied_pairs(n, [&](std::size_t a, std::size_t b) { return xs[a] == xs[b]; });
  const std::int64_t joint_ties = tied_pairs(
      n, [&](std::size_t a, std::size_t b) { return xs[a] == xs[b] && ys[a] == ys[b]; });

  std::vector<double> buffer(n);
  const std::int64_t swaps = merge_count(ys, buffer, 0, n);
  const std::int64_t y_ties = tied_pairs(n, [&](std::size_t a, std::size_t b) { return ys[a] == ys[b]; });

  const std::int64_t concordant_minus_discordant = total - x_ties - y_ties + joint_ties - 2 * swaps;
  const std::int64_t denom_sq = (total - x_ties) * (total - y_ties);
  if (denom_sq == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(concordant_minus_discordant) /
         std::sqrt(static_cast<double>(total - x_ties)) / std::sqrt(static_cast<double>(total - y_ties));
}

double ranking_loss(const Eigen::Ref<const Eigen::VectorXd>& v_hat,
                    const Eigen::Ref<const Eigen::VectorXd>& v_true) {
  return -kendall_tau_b(v_hat, v_true);
}

double tv_distance(const Eigen::Ref<const Eigen::VectorXd>& p,
                   const Eigen::Ref<const Eigen::VectorXd>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("distributions differ in size");
  return 0.5 * (p - q).cwiseAbs().sum();
}

MeanCi mean_ci(std::span<const double> samples, double level) {
  if (samples.empty()) throw std::invalid_argument("mean_ci needs at least one sample");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  if (samples.size() == 1) return {mean, mean, mean};
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const boost::math::students_t dist(n - 1.0);
  const double t = boost::math::quantile(dist, 0.5 + level / 2.0);
  const double half = t * sd / std::sqrt(n);
  return {mean, mean - half, mean + half};
}

}  // namespace discreg
