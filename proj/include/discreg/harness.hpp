#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "discreg/control.hpp"
#include "discreg/env_gen.hpp"

namespace discreg {

enum class Experiment {
  kTd0Discount,
  kTd0L2,
  kLstdDiscount,
  kLstdL2,
  kUniformity,
  kMixing,
  kPolicyOpt,
  kGrid2d,
};

/// What the sweep axis means for experiments that support both regularizers.
enum class RegAxis { kDiscount, kL2 };

enum class LossKind { kL2Value, kRanking };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);

/**
 * A declarative experiment sweep.
 *
 * sweep_values is the regularization axis (guidance discount or L2 factor).
 * secondary_values depends on the experiment: trajectory counts for the TD/LSTD
 * and policy-optimization families, TV targets for uniformity, mixing times for
 * mixing, and L2 factors for grid_2d (whose sweep axis is the discount).
 */
struct SweepSpec {
  Experiment experiment = Experiment::kTd0Discount;
  std::vector<double> sweep_values;
  std::vector<double> secondary_values;
  std::size_t n_instances = 100;
  std::uint64_t master_seed = 0;

  RegAxis regularizer = RegAxis::kDiscount;  // uniformity, mixing, policy_opt
  LossKind loss = LossKind::kL2Value;        // policy-evaluation experiments
  double gamma_eval = 0.99;
  GridSpec grid;

  // TD learners.
  std::size_t n_iter = 5000;
  double lr_numerator = 500.0;
  double lr_offset = 1000.0;

  // Data collection.
  std::size_t traj_len = 50;
  std::size_t n_traj = 2;          // mixing
  std::size_t iid_samples = 400;   // uniformity
  double tv_tolerance = kDefaultTvTolerance;
  std::size_t max_resamples = 1000;  // mixing augmentation rejections per instance

  // Policy optimization.
  std::size_t episodes = 5;
  double epsilon = 0.1;
  Evaluator evaluator = Evaluator::kSarsa;

  /// Ridge always added to LSTD/LSTDQ so that unvisited features stay solvable.
  double ridge_floor = 1e-6;

  void validate() const;
};

struct SweepRow {
  std::string experiment;
  double secondary = 0.0;
  double sweep = 0.0;
  double loss_mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n_reps = 0;

  bool operator==(const SweepRow&) const = default;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  /// Mixing experiment: augmentation attempts rejected and total attempts.
  std::size_t rejected_attempts = 0;
  std::size_t total_attempts = 0;
};

/// Row index of the minimal loss_mean for each curve, ordered by secondary value.
struct CurveArgmin {
  double secondary = 0.0;
  std::size_t row = 0;
};
std::vector<CurveArgmin> curve_argmins(const SweepResult& result);

/// An instance failed; carries what is needed to replay it.
class SweepError : public std::runtime_error {
 public:
  SweepError(const std::string& what, double secondary, double sweep, std::uint64_t seed)
      : std::runtime_error(what), secondary_(secondary), sweep_(sweep), seed_(seed) {}
  double secondary() const { return secondary_; }
  double sweep() const { return sweep_; }
  std::uint64_t seed() const { return seed_; }

 private:
  double secondary_;
  double sweep_;
  std::uint64_t seed_;
};

/// Worker count: DISCREG_WORKERS when set, otherwise the hardware concurrency.
std::size_t default_worker_count();

/**
 * Runs every (secondary, sweep, instance) point and aggregates with mean_ci.
 *
 * Environment and data of an instance depend only on (master_seed, experiment,
 * secondary index, instance index), so every point of a curve is evaluated on
 * the same MDPs and datasets. The result does not depend on the worker count.
 */
SweepResult run_sweep(const SweepSpec& spec, std::optional<std::size_t> workers = std::nullopt);

/// Per-instance losses [secondary][sweep][instance], before aggregation.
using LossTable = std::vector<std::vector<std::vector<double>>>;
LossTable run_sweep_losses(const SweepSpec& spec, std::optional<std::size_t> workers,
                           std::size_t* rejected_attempts = nullptr,
                           std::size_t* total_attempts = nullptr);

inline const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> names = {"fig1a", "fig1b", "fig1c", "fig1d",
                                                 "fig2a", "fig2b", "fig2c", "fig2d",
                                                 "fig3a", "fig3b", "fig4"};
  return names;
}

/// Parameterization of a tabular figure with 100 instances.
SweepSpec figure_preset(const std::string& name);

// Sweep configs are JSON objects whose keys mirror SweepSpec's fields.
SweepSpec sweep_spec_from_json(const std::string& text);
std::string sweep_spec_to_json(const SweepSpec& spec);
SweepSpec load_sweep_spec(const std::string& path);

// CSV: experiment,secondary,sweep,loss_mean,ci_low,ci_high,n_reps
std::string result_to_csv(const SweepResult& result);
SweepResult result_from_csv(const std::string& text);
void emit_csv(const SweepResult& result, const std::string& path);
SweepResult load_result_csv(const std::string& path);

/// One polyline per secondary value with a shaded CI band and a star at each argmin.
std::string result_to_svg(const SweepResult& result, const std::string& title = "");
void emit_svg(const SweepResult& result, const std::string& path, const std::string& title = "");

}  // namespace discreg
