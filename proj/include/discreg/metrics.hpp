#pragma once

#include <span>

#include <Eigen/Core>

namespace discreg {

/// Euclidean distance between an estimate and the true values.
double l2_value_loss(const Eigen::Ref<const Eigen::VectorXd>& v_hat,
                     const Eigen::Ref<const Eigen::VectorXd>& v_true);

/// Kendall's tau-b with tie correction. NaN when either input is constant.
double kendall_tau_b(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& y);

/// -tau_b between estimated and true values; lower is better. NaN when undefined.
double ranking_loss(const Eigen::Ref<const Eigen::VectorXd>& v_hat,
                    const Eigen::Ref<const Eigen::VectorXd>& v_true);

/// Half the L1 distance between two probability vectors.
double tv_distance(const Eigen::Ref<const Eigen::VectorXd>& p,
                   const Eigen::Ref<const Eigen::VectorXd>& q);

struct MeanCi {
  double mean = 0.0;
  double low = 0.0;
  double high = 0.0;
};

/// Student-t confidence interval on the mean. A single sample gives a zero-width interval.
MeanCi mean_ci(std::span<const double> samples, double level = 0.95);

}  // namespace discreg
