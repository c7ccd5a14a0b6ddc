#include "discreg/env_gen.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "discreg/metrics.hpp"

namespace discreg {

void GridSpec::validate() const {
  if (width == 0 || height == 0 || width * height < 2) {
    throw std::invalid_argument("grid needs at least two cells");
  }
  if (!(reward_std >= 0.0)) throw std::invalid_argument("reward_std must be nonnegative");
  if (!(reward_mean_lo <= reward_mean_hi)) throw std::invalid_argument("empty reward mean range");
}

TabularMdp gridworld(const GridSpec& spec, Rng& rng) {
  spec.validate();
  const std::size_t n = spec.width * spec.height;
  const auto ns = static_cast<Eigen::Index>(n);

  std::vector<double> success(n);
  for (auto& p : success) p = sample_uniform(rng, 0.0, 1.0);
  const auto goal = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);

  std::vector<Matrix> transition(kGridActions, Matrix::Zero(ns, ns));
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t row = s / spec.width;
    const std::size_t col = s % spec.width;
    const auto si = static_cast<Eigen::Index>(s);
    for (std::size_t a = 0; a < kGridActions; ++a) {
      std::size_t target = s;
      bool valid = false;
      switch (static_cast<GridAction>(a)) {
        case GridAction::kLeft:
          valid = col > 0;
          if (valid) target = s - 1;
          break;
        case GridAction::kRight:
          valid = col + 1 < spec.width;
          if (valid) target = s + 1;
          break;
        case GridAction::kUp:
          valid = row > 0;
          if (valid) target = s - spec.width;
          break;
        case GridAction::kDown:
          valid = row + 1 < spec.height;
          if (valid) target = s + spec.width;
          break;
        case GridAction::kStay:
          break;
      }
      Matrix& p = transition[a];
      if (valid) {
        p(si, static_cast<Eigen::Index>(target)) = success[s];
        p(si, si) = 1.0 - success[s];
      } else {
        p(si, si) = 1.0;
      }
    }
  }

  Matrix reward_mean(ns, static_cast<Eigen::Index>(kGridActions));
  for (std::size_t s = 0; s < n; ++s) {
    const double mean = s == goal ? spec.goal_reward_mean
                                  : sample_uniform(rng, spec.reward_mean_lo, spec.reward_mean_hi);
    reward_mean.row(static_cast<Eigen::Index>(s)).setConstant(mean);
  }
  Matrix reward_std = Matrix::Constant(ns, static_cast<Eigen::Index>(kGridActions), spec.reward_std);
  return TabularMdp(std::move(transition), std::move(reward_mean), std::move(reward_std),
                    Vector::Constant(ns, 1.0 / static_cast<double>(n)));
}

namespace {

void check_square_stochastic(const Matrix& chain) {
  if (chain.rows() != chain.cols() || chain.rows() == 0) {
    throw std::invalid_argument("chain must be a nonempty square matrix");
  }
  for (Eigen::Index i = 0; i < chain.rows(); ++i) {
    if ((chain.row(i).array() < -1e-12).any() || std::abs(chain.row(i).sum() - 1.0) > 1e-9) {
      throw std::invalid_argument("chain must be row-stochastic");
    }
  }
}

std::vector<double> sorted_magnitudes(const Matrix& chain) {
  Eigen::EigenSolver<Matrix> solver(chain, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigenvalue computation failed");
  std::vector<double> mags;
  mags.reserve(static_cast<std::size_t>(chain.rows()));
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    mags.push_back(std::abs(solver.eigenvalues()[i]));
  }
  std::sort(mags.begin(), mags.end(), std::greater<>());
  return mags;
}

}  // namespace

double spectral_gap(const Matrix& chain) {
  check_square_stochastic(chain);
  if (chain.rows() == 1) return 1.0;
  const auto mags = sorted_magnitudes(chain);
  return std::clamp(1.0 - mags[1], 0.0, 1.0);
}

double mixing_time(double gap) {
  if (gap <= 1e-12) return std::numeric_limits<double>::infinity();
  return 1.0 / gap;
}

Vector stationary_distribution(const Matrix& chain) {
  check_square_stochastic(chain);
  const auto n = chain.rows();
  // Solve pi^T (P - I) = 0 with sum(pi) = 1 by replacing one equation.
  Matrix system = (chain - Matrix::Identity(n, n)).transpose();
  system.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs[n - 1] = 1.0;
  Vector pi = system.fullPivLu().solve(rhs);
  pi = pi.cwiseMax(0.0);
  return pi / pi.sum();
}

Matrix augment_mixing_time(const Matrix& chain, double target_mixing_time) {
  check_square_stochastic(chain);
  if (!(target_mixing_time >= 1.0) || !std::isfinite(target_mixing_time)) {
    throw std::invalid_argument("target mixing time must be finite and >= 1");
  }
  const auto n = chain.rows();
  const double target_gap = 1.0 / target_mixing_time;
  const double target_mag = 1.0 - target_gap;
  if (n == 1) return chain;

  Eigen::EigenSolver<Matrix> solver(chain);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  using Complex = std::complex<double>;
  const Eigen::VectorXcd eigenvalues = solver.eigenvalues();
  const Eigen::MatrixXcd vectors = solver.eigenvectors();

  Eigen::Index dominant = 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    if (std::abs(eigenvalues[i] - 1.0) < std::abs(eigenvalues[dominant] - 1.0)) dominant = i;
  }
  double second_mag = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == dominant) continue;
    if (std::abs(eigenvalues[i] - 1.0) < 1e-9) {
      throw std::invalid_argument("chain is reducible: eigenvalue 1 is not simple");
    }
    second_mag = std::max(second_mag, std::abs(eigenvalues[i]));
  }

  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(vectors);
  const auto& sv = svd.singularValues();
  const double condition = sv[0] / sv[sv.size() - 1];
  if (!std::isfinite(condition) || condition > 1e10) {
    throw DefectiveMatrixError("transition matrix is numerically defective (eigenvector condition " +
                               std::to_string(condition) + "); resample the MDP instance");
  }

  Eigen::VectorXcd rescaled = eigenvalues;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == dominant) {
      rescaled[i] = Complex(1.0, 0.0);
      continue;
    }
    const double mag = std::abs(eigenvalues[i]);
    const bool is_second = mag >= second_mag * (1.0 - 1e-10);
    if (is_second || mag > target_mag) {
      const Complex phase = mag > 0.0 ? eigenvalues[i] / mag : Complex(1.0, 0.0);
      rescaled[i] = phase * target_mag;
    }
  }

  const Eigen::MatrixXcd rebuilt = vectors * rescaled.asDiagonal() * vectors.inverse();
  Matrix projected = rebuilt.real().cwiseMax(0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double total = projected.row(i).sum();
    if (!(total > 0.0)) {
      throw AugmentationRejected("projected chain has an all-zero row", 0.0);
    }
    projected.row(i) /= total;
  }

  const double achieved = spectral_gap(projected);
  // Both the gap and its inverse must land within the tolerance.
  const double achieved_time = mixing_time(achieved);
  if (std::abs(achieved - target_gap) > kMixingGapTolerance * target_gap ||
      std::abs(achieved_time - target_mixing_time) > kMixingGapTolerance * target_mixing_time) {
    throw AugmentationRejected("projected chain has gap " + std::to_string(achieved) +
                                   ", target " + std::to_string(target_gap),
                               achieved);
  }
  return projected;
}

SampledDistribution sample_distribution_with_tv(std::size_t n_outcomes, double target_tv,
                                                double tol, Rng& rng, std::size_t max_attempts) {
  if (n_outcomes == 0) throw std::invalid_argument("need at least one outcome");
  const double n = static_cast<double>(n_outcomes);
  const double max_tv = 1.0 - 1.0 / n;
  if (!(tol >= 0.0)) throw std::invalid_argument("tolerance must be nonnegative");
  if (!(target_tv >= 0.0) || target_tv > max_tv + tol) {
    throw std::invalid_argument("target TV " + std::to_string(target_tv) +
                                " is not achievable with " + std::to_string(n_outcomes) +
                                " outcomes");
  }
  const Vector uniform = Vector::Constant(static_cast<Eigen::Index>(n_outcomes), 1.0 / n);

  if (target_tv <= tol) return {uniform, 0.0};
  if (target_tv >= max_tv - tol) {
    Vector point = Vector::Zero(static_cast<Eigen::Index>(n_outcomes));
    point[static_cast<Eigen::Index>(
        std::uniform_int_distribution<std::size_t>(0, n_outcomes - 1)(rng))] = 1.0;
    return {point, tv_distance(point, uniform)};
  }

  double closest = -1.0;
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    if (attempt == 100'000) {
      std::clog << "sample_distribution_with_tv: 1e5 rejections for target " << target_tv
                << " (tol " << tol << ")\n";
    }
    const double concentration = std::exp(sample_uniform(rng, std::log(0.01), std::log(10.0)));
    const double shrink = sample_uniform(rng, 0.0, 1.0);
    Vector candidate =
        (1.0 - shrink) * uniform + shrink * sample_dirichlet(rng, n_outcomes, concentration);
    candidate /= candidate.sum();
    const double tv = tv_distance(candidate, uniform);
    if (std::abs(tv - target_tv) <= tol) return {std::move(candidate), tv};
    if (closest < 0.0 || std::abs(tv - target_tv) < std::abs(closest - target_tv)) closest = tv;
  }
  throw RejectionLimitError("no distribution within " + std::to_string(tol) + " of TV " +
                                std::to_string(target_tv) + "; closest " + std::to_string(closest),
                            closest);
}

}  // namespace discreg
