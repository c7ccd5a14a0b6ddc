#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

#include "discreg/mdp.hpp"
#include "discreg/random.hpp"

namespace discreg {

/// Random GridWorld parameters. Defaults give the 4x4 benchmark.
struct GridSpec {
  std::size_t width = 4;
  std::size_t height = 4;
  double goal_reward_mean = 1.0;
  double reward_mean_lo = -0.5;
  double reward_mean_hi = 0.5;
  double reward_std = 0.1;

  void validate() const;
};

enum class GridAction : std::size_t { kLeft = 0, kRight = 1, kUp = 2, kDown = 3, kStay = 4 };
inline constexpr std::size_t kGridActions = 5;

/**
 * Random GridWorld. Each state s draws a move-success probability p_s ~ U[0,1];
 * a valid move succeeds with p_s and otherwise leaves the agent in place, an
 * off-grid move always leaves it in place. One uniformly chosen goal state gets
 * reward mean goal_reward_mean, every other state a mean drawn from
 * [reward_mean_lo, reward_mean_hi], shared by all actions of the state.
 * State index is row * width + col; the initial distribution is uniform.
 */
TabularMdp gridworld(const GridSpec& spec, Rng& rng);

/// 1 - |lambda_2| of a row-stochastic matrix, lambda_2 the second-largest eigenvalue by magnitude.
double spectral_gap(const Matrix& chain);

/// 1 / gap, or +infinity when gap <= 1e-12.
double mixing_time(double gap);
inline double mixing_time_of(const Matrix& chain) { return mixing_time(spectral_gap(chain)); }

/// Stationary distribution (left Perron vector) of an irreducible chain.
Vector stationary_distribution(const Matrix& chain);

/// Thrown when the eigenvector basis is numerically singular. Resample the MDP instance.
class DefectiveMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when the projected chain misses the target gap. Resample the MDP instance.
class AugmentationRejected : public std::runtime_error {
 public:
  AugmentationRejected(const std::string& what, double achieved_gap)
      : std::runtime_error(what), achieved_gap_(achieved_gap) {}
  double achieved_gap() const { return achieved_gap_; }

 private:
  double achieved_gap_;
};

/// Relative tolerance on the achieved gap of augment_mixing_time.
inline constexpr double kMixingGapTolerance = 0.05;

/**
 * Forces 1 - |lambda_2| = 1 / target_mixing_time.
 *
 * The chain is eigendecomposed, every subdominant eigenvalue of maximal
 * magnitude is rescaled to the target magnitude (phase kept, so conjugate
 * pairs stay paired), and any other eigenvalue that now exceeds the target
 * magnitude is clamped to it. The reconstruction V diag(mu) V^-1 is projected
 * back onto stochastic matrices by taking the real part, clipping negative
 * entries and renormalizing rows. The gap of the result is re-measured and
 * AugmentationRejected is thrown when it is off by more than 5% relative.
 */
Matrix augment_mixing_time(const Matrix& chain, double target_mixing_time);

struct SampledDistribution {
  Vector probs;
  double tv_from_uniform = 0.0;
};

/// Thrown when rejection sampling runs out of attempts.
class RejectionLimitError : public std::runtime_error {
 public:
  RejectionLimitError(const std::string& what, double closest_tv)
      : std::runtime_error(what), closest_tv_(closest_tv) {}
  double closest_tv() const { return closest_tv_; }

 private:
  double closest_tv_;
};

inline constexpr double kDefaultTvTolerance = 0.01;

/**
 * Rejection-samples a distribution over n_outcomes whose total-variation
 * distance from uniform lies in [target_tv - tol, target_tv + tol].
 *
 * Proposals are (1 - t) * uniform + t * d with d ~ Dirichlet(c), c log-uniform
 * in [0.01, 10], and t ~ U[0, 1]. Targets within tol of 0 return the uniform
 * distribution; targets within tol of the maximum 1 - 1/n return a point mass.
 */
SampledDistribution sample_distribution_with_tv(std::size_t n_outcomes, double target_tv,
                                                double tol, Rng& rng,
                                                std::size_t max_attempts = 1'000'000);

}  // namespace discreg
