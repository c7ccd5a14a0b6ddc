#include "discreg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "discreg/lstd.hpp"
#include "discreg/metrics.hpp"
#include "discreg/sampling.hpp"
#include "discreg/td.hpp"

namespace discreg {

namespace {

const std::vector<std::pair<Experiment, std::string>>& experiment_names() {
  static const std::vector<std::pair<Experiment, std::string>> names = {
      {Experiment::kTd0Discount, "td0_discount"}, {Experiment::kTd0L2, "td0_l2"},
      {Experiment::kLstdDiscount, "lstd_discount"}, {Experiment::kLstdL2, "lstd_l2"},
      {Experiment::kUniformity, "uniformity"},     {Experiment::kMixing, "mixing"},
      {Experiment::kPolicyOpt, "policy_opt"},      {Experiment::kGrid2d, "grid_2d"},
  };
  return names;
}

}  // namespace

std::string to_string(Experiment e) {
  for (const auto& [value, name] : experiment_names()) {
    if (value == e) return name;
  }
  throw std::logic_error("unknown experiment");
}

Experiment experiment_from_string(const std::string& name) {
  for (const auto& [value, n] : experiment_names()) {
    if (n == name) return value;
  }
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

void SweepSpec::validate() const {
  if (sweep_values.empty() || secondary_values.empty()) {
    throw std::invalid_argument("sweep grids must be nonempty");
  }
  if (n_instances == 0) throw std::invalid_argument("n_instances must be >= 1");
  if (!(gamma_eval > 0.0 && gamma_eval < 1.0)) {
    throw std::invalid_argument("gamma_eval must lie in (0, 1)");
  }
  grid.validate();
  if (n_iter == 0 || traj_len == 0) throw std::invalid_argument("n_iter and traj_len must be >= 1");
  if (!(ridge_floor >= 0.0)) throw std::invalid_argument("ridge_floor must be nonnegative");
  const bool discount_axis =
      experiment == Experiment::kTd0Discount || experiment == Experiment::kLstdDiscount ||
      experiment == Experiment::kGrid2d ||
      ((experiment == Experiment::kUniformity || experiment == Experiment::kMixing ||
        experiment == Experiment::kPolicyOpt) &&
       regularizer == RegAxis::kDiscount);
  for (double v : sweep_values) {
    if (discount_axis ? !(v > 0.0 && v <= gamma_eval) : !(v >= 0.0)) {
      throw std::invalid_argument("sweep value " + std::to_string(v) + " is out of range");
    }
  }
  for (double v : secondary_values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("secondary value " + std::to_string(v) + " is out of range");
    }
  }
}

std::vector<CurveArgmin> curve_argmins(const SweepResult& result) {
  std::map<double, std::size_t> best;
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& row = result.rows[i];
    auto it = best.find(row.secondary);
    if (it == best.end()) {
      best.emplace(row.secondary, i);
    } else if (row.loss_mean < result.rows[it->second].loss_mean) {
      it->second = i;
    }
  }
  std::vector<CurveArgmin> out;
  for (const auto& [secondary, row] : best) out.push_back({secondary, row});
  return out;
}

std::size_t default_worker_count() {
  if (const char* env = std::getenv("DISCREG_WORKERS")) {
    std::size_t value = 0;
    const std::string_view text(env);
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec == std::errc() && value > 0) return value;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

std::size_t as_count(double v, const char* what) {
  if (!(v >= 1.0) || v != std::floor(v)) {
    throw std::invalid_argument(std::string(what) + " must be a positive integer");
  }
  return static_cast<std::size_t>(v);
}

double policy_eval_loss(const SweepSpec& spec, const Vector& estimate, const Vector& truth) {
  if (spec.loss == LossKind::kL2Value) return l2_value_loss(estimate, truth);
  const double loss = ranking_loss(estimate, truth);
  // A constant estimate carries no ranking information: count it as zero correlation.
  return std::isnan(loss) ? 0.0 : loss;
}

RegConfig td_config(const SweepSpec& spec, double gamma, Regularizer reg) {
  RegConfig config;
  config.gamma = gamma;
  config.gamma_eval = spec.gamma_eval;
  config.reg = reg;
  config.n_iter = spec.n_iter;
  config.lr = [num = spec.lr_numerator, off = spec.lr_offset](std::size_t i) {
    return num / (off + static_cast<double>(i));
  };
  return config;
}

bool uses_discount_axis(const SweepSpec& spec) {
  switch (spec.experiment) {
    case Experiment::kTd0Discount:
    case Experiment::kLstdDiscount:
    case Experiment::kGrid2d:
      return true;
    case Experiment::kTd0L2:
    case Experiment::kLstdL2:
      return false;
    default:
      return spec.regularizer == RegAxis::kDiscount;
  }
}

// (guidance discount, L2 factor) for a sweep value.
std::pair<double, double> regularization_point(const SweepSpec& spec, double sweep_value) {
  if (uses_discount_axis(spec)) return {sweep_value, 0.0};
  return {spec.gamma_eval, sweep_value};
}

struct InstanceOutput {
  std::vector<double> losses;  // one per evaluated grid point
  std::size_t rejected = 0;
  std::size_t attempts = 0;
};

/// Failure inside one instance, with the grid point that was being evaluated.
struct PointFailure : std::runtime_error {
  PointFailure(const std::string& what, std::size_t sweep_index)
      : std::runtime_error(what), sweep_index(sweep_index) {}
  std::size_t sweep_index;
};

template <typename Fn>
void for_each_sweep(std::size_t n, Fn&& fn) {
  for (std::size_t j = 0; j < n; ++j) {
    try {
      fn(j);
    } catch (const PointFailure&) {
      throw;
    } catch (const std::exception& e) {
      throw PointFailure(e.what(), j);
    }
  }
}

// Trajectory-based policy evaluation: td0_* and lstd_*.
InstanceOutput run_trajectory_eval(const SweepSpec& spec, double secondary, std::uint64_t seed) {
  Rng rng(seed);
  const TabularMdp mdp = gridworld(spec.grid, rng);
  const Policy policy = Policy::uniform(mdp.n_states(), mdp.n_actions());
  const Vector truth = exact_value(mdp, policy, spec.gamma_eval);
  const TransitionDataset data =
      collect_trajectories(mdp, policy, as_count(secondary, "trajectory count"), spec.traj_len, rng);
  const FeatureMap features = FeatureMap::tabular(mdp.n_states());
  const bool td = spec.experiment == Experiment::kTd0Discount || spec.experiment == Experiment::kTd0L2;
  // One index sequence shared by every point of the curve.
  const std::uint64_t learner_seed = combine_seed({seed, 1});

  InstanceOutput out;
  out.losses.resize(spec.sweep_values.size());
  for_each_sweep(spec.sweep_values.size(), [&](std::size_t j) {
    const auto [gamma, l2] = regularization_point(spec, spec.sweep_values[j]);
    Vector estimate;
    if (td) {
      Rng learner_rng(learner_seed);
      const Regularizer reg = l2 > 0.0 ? Regularizer::l2(l2) : Regularizer::none();
      estimate = td0_batch(data, features, td_config(spec, gamma, reg),
                           Vector::Zero(static_cast<Eigen::Index>(mdp.n_states())), learner_rng);
    } else {
      estimate = lstd(data, features, gamma, l2 + spec.ridge_floor);
    }
    out.losses[j] = policy_eval_loss(spec, features.state_values(estimate), truth);
  });
  return out;
}

InstanceOutput run_uniformity(const SweepSpec& spec, double secondary, std::uint64_t seed) {
  Rng rng(seed);
  const TabularMdp mdp = gridworld(spec.grid, rng);
  const Policy policy = Policy::uniform(mdp.n_states(), mdp.n_actions());
  const Vector truth = exact_value(mdp, policy, spec.gamma_eval);
  const SampledDistribution dist = sample_distribution_with_tv(
      mdp.n_states() * mdp.n_actions(), secondary, spec.tv_tolerance, rng);
  const TransitionDataset data =
      iid_dataset(mdp, policy, dist.probs, spec.iid_samples, rng, "tv=" + std::to_string(secondary));
  const FeatureMap features = FeatureMap::tabular(mdp.n_states(), mdp.n_actions());

  InstanceOutput out;
  out.losses.resize(spec.sweep_values.size());
  for_each_sweep(spec.sweep_values.size(), [&](std::size_t j) {
    const auto [gamma, l2] = regularization_point(spec, spec.sweep_values[j]);
    const Vector theta = lstdq(data, features, policy, gamma, l2 + spec.ridge_floor);
    const Vector estimate = features.q_values(theta).cwiseProduct(policy.probs()).rowwise().sum();
    out.losses[j] = policy_eval_loss(spec, estimate, truth);
  });
  return out;
}

InstanceOutput run_mixing(const SweepSpec& spec, double secondary, std::uint64_t seed) {
  InstanceOutput out;
  std::optional<TabularMdp> chain_mdp;
  Rng rng(seed);
  for (std::size_t attempt = 0; attempt < spec.max_resamples && !chain_mdp; ++attempt) {
    ++out.attempts;
    Rng env_rng(combine_seed({seed, 2, attempt}));
    const TabularMdp mdp = gridworld(spec.grid, env_rng);
    const Policy uniform = Policy::uniform(mdp.n_states(), mdp.n_actions());
    Matrix chain;
    try {
      chain = augment_mixing_time(induced_chain(mdp, uniform), secondary);
    } catch (const DefectiveMatrixError&) {
      ++out.rejected;
      continue;
    } catch (const AugmentationRejected&) {
      ++out.rejected;
      continue;
    }
    // The augmented chain as a single-action reward process.
    const auto n = static_cast<Eigen::Index>(mdp.n_states());
    Matrix reward_mean = induced_reward(mdp, uniform);
    Matrix reward_std = mdp.reward_std().rowwise().mean();
    chain_mdp.emplace(std::vector<Matrix>{chain}, std::move(reward_mean), std::move(reward_std),
                      Vector::Constant(n, 1.0 / static_cast<double>(n)));
  }
  if (!chain_mdp) {
    throw std::runtime_error("mixing augmentation rejected " + std::to_string(out.attempts) +
                             " MDP instances in a row");
  }
  const Policy only = Policy::uniform(chain_mdp->n_states(), 1);
  const Vector truth = exact_value(*chain_mdp, only, spec.gamma_eval);
  const TransitionDataset data =
      collect_trajectories(*chain_mdp, only, spec.n_traj, spec.traj_len, rng);
  const FeatureMap features = FeatureMap::tabular(chain_mdp->n_states());

  out.losses.resize(spec.sweep_values.size());
  for_each_sweep(spec.sweep_values.size(), [&](std::size_t j) {
    const auto [gamma, l2] = regularization_point(spec, spec.sweep_values[j]);
    const Vector estimate = lstd(data, features, gamma, l2 + spec.ridge_floor);
    out.losses[j] = policy_eval_loss(spec, features.state_values(estimate), truth);
  });
  return out;
}

InstanceOutput run_policy_opt(const SweepSpec& spec, std::size_t n_traj,
                              const std::vector<std::pair<double, double>>& points,
                              std::uint64_t seed) {
  Rng env_rng(seed);
  const TabularMdp mdp = gridworld(spec.grid, env_rng);
  const ValueVector optimal = optimal_value(mdp, spec.gamma_eval).value;
  ApiSettings settings;
  settings.episodes = spec.episodes;
  settings.n_traj = n_traj;
  settings.traj_len = spec.traj_len;
  settings.epsilon = spec.epsilon;
  settings.evaluator = spec.evaluator;
  settings.lstdq_ridge_floor = spec.ridge_floor;

  InstanceOutput out;
  out.losses.resize(points.size());
  for_each_sweep(points.size(), [&](std::size_t j) {
    const auto [gamma, l2] = points[j];
    Rng rng(combine_seed({seed, 3}));
    const Regularizer reg = l2 > 0.0 ? Regularizer::l2(l2) : Regularizer::none();
    out.losses[j] =
        approx_policy_iteration(mdp, settings, td_config(spec, gamma, reg), rng, optimal)
            .optimality_loss;
  });
  return out;
}

template <typename Task>
void run_parallel(std::size_t n_tasks, std::size_t workers, Task&& task) {
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t failed_task = n_tasks;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_tasks) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        // Keep the lowest failing task so the reported error is schedule independent.
        if (i < failed_task) {
          failed_task = i;
          error = std::current_exception();
        }
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n_tasks, 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

LossTable run_sweep_losses(const SweepSpec& spec, std::optional<std::size_t> workers,
                           std::size_t* rejected_attempts, std::size_t* total_attempts) {
  spec.validate();
  const std::size_t n_sec = spec.secondary_values.size();
  const std::size_t n_sweep = spec.sweep_values.size();
  const std::size_t n_inst = spec.n_instances;
  const std::uint64_t experiment_id = hash_text(to_string(spec.experiment));
  LossTable table(n_sec, std::vector<std::vector<double>>(n_sweep, std::vector<double>(n_inst)));
  std::vector<std::size_t> rejected(n_sec * n_inst, 0), attempts(n_sec * n_inst, 0);

  const bool two_axis = spec.experiment == Experiment::kGrid2d;
  // grid_2d: both axes are regularization knobs, so a task covers a whole instance.
  const std::size_t n_tasks = two_axis ? n_inst : n_sec * n_inst;

  run_parallel(n_tasks, workers.value_or(default_worker_count()), [&](std::size_t task) {
    const std::size_t sec = two_axis ? 0 : task / n_inst;
    const std::size_t inst = two_axis ? task : task % n_inst;
    const std::uint64_t seed = two_axis
                                   ? combine_seed({spec.master_seed, experiment_id, inst})
                                   : combine_seed({spec.master_seed, experiment_id, sec, inst});
    const double secondary = spec.secondary_values[sec];
    try {
      InstanceOutput out;
      switch (spec.experiment) {
        case Experiment::kTd0Discount:
        case Experiment::kTd0L2:
        case Experiment::kLstdDiscount:
        case Experiment::kLstdL2:
          out = run_trajectory_eval(spec, secondary, seed);
          break;
        case Experiment::kUniformity:
          out = run_uniformity(spec, secondary, seed);
          break;
        case Experiment::kMixing:
          out = run_mixing(spec, secondary, seed);
          break;
        case Experiment::kPolicyOpt: {
          std::vector<std::pair<double, double>> points;
          for (double v : spec.sweep_values) points.push_back(regularization_point(spec, v));
          out = run_policy_opt(spec, as_count(secondary, "trajectory count"), points, seed);
          break;
        }
        case Experiment::kGrid2d: {
          std::vector<std::pair<double, double>> points;
          for (double l2 : spec.secondary_values) {
            for (double gamma : spec.sweep_values) points.emplace_back(gamma, l2);
          }
          out = run_policy_opt(spec, spec.n_traj, points, seed);
          break;
        }
      }
      if (two_axis) {
        for (std::size_t s = 0; s < n_sec; ++s) {
          for (std::size_t j = 0; j < n_sweep; ++j) table[s][j][inst] = out.losses[s * n_sweep + j];
        }
      } else {
        for (std::size_t j = 0; j < n_sweep; ++j) table[sec][j][inst] = out.losses[j];
        rejected[task] = out.rejected;
        attempts[task] = out.attempts;
      }
    } catch (const PointFailure& e) {
      const std::size_t j = two_axis ? e.sweep_index % n_sweep : e.sweep_index;
      const double sec_value =
          two_axis ? spec.secondary_values[e.sweep_index / n_sweep] : secondary;
      std::ostringstream msg;
      msg << to_string(spec.experiment) << " failed at secondary=" << sec_value
          << " sweep=" << spec.sweep_values[j] << " instance=" << inst << " seed=" << seed << ": "
          << e.what();
      throw SweepError(msg.str(), sec_value, spec.sweep_values[j], seed);
    } catch (const SweepError&) {
      throw;
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << to_string(spec.experiment) << " failed at secondary=" << secondary
          << " instance=" << inst << " seed=" << seed << ": " << e.what();
      throw SweepError(msg.str(), secondary, std::nan(""), seed);
    }
  });

  if (rejected_attempts != nullptr) {
    *rejected_attempts = 0;
    for (auto r : rejected) *rejected_attempts += r;
  }
  if (total_attempts != nullptr) {
    *total_attempts = 0;
    for (auto a : attempts) *total_attempts += a;
  }
  return table;
}

SweepResult run_sweep(const SweepSpec& spec, std::optional<std::size_t> workers) {
  SweepResult result;
  const LossTable table =
      run_sweep_losses(spec, workers, &result.rejected_attempts, &result.total_attempts);
  const std::string name = to_string(spec.experiment);
  for (std::size_t s = 0; s < spec.secondary_values.size(); ++s) {
    for (std::size_t j = 0; j < spec.sweep_values.size(); ++j) {
      const MeanCi ci = mean_ci(table[s][j]);
      result.rows.push_back({name, spec.secondary_values[s], spec.sweep_values[j], ci.mean, ci.low,
                             ci.high, table[s][j].size()});
    }
  }
  std::stable_sort(result.rows.begin(), result.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.secondary < b.secondary || (a.secondary == b.secondary && a.sweep < b.sweep);
  });
  return result;
}

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

// Step 0.01 up to gamma_eval = 0.99.
std::vector<double> discount_grid() { return linspace(0.8, 0.99, 20); }

}  // namespace

SweepSpec figure_preset(const std::string& name) {
  SweepSpec spec;
  spec.n_instances = 100;
  spec.master_seed = 2020;
  const std::vector<double> trajectory_counts = {1, 2, 4, 8, 16, 32};
  const std::vector<double> tv_targets = {0.1, 0.3, 0.6, 0.8};
  const std::vector<double> mixing_times = {2, 5, 10, 20};
  const std::vector<double> episode_counts = {4, 8, 16};

  if (name == "fig1a") {
    spec.experiment = Experiment::kTd0Discount;
    spec.sweep_values = discount_grid();
    spec.secondary_values = trajectory_counts;
  } else if (name == "fig1b") {
    spec.experiment = Experiment::kTd0L2;
    spec.sweep_values = linspace(0.0, 0.002, 11);
    spec.secondary_values = trajectory_counts;
  } else if (name == "fig1c") {
    spec.experiment = Experiment::kLstdDiscount;
    spec.sweep_values = discount_grid();
    spec.secondary_values = trajectory_counts;
  } else if (name == "fig1d") {
    spec.experiment = Experiment::kLstdL2;
    spec.sweep_values = linspace(0.0, 0.005, 11);
    spec.secondary_values = trajectory_counts;
  } else if (name == "fig2a" || name == "fig2b") {
    spec.experiment = Experiment::kUniformity;
    spec.regularizer = name == "fig2a" ? RegAxis::kDiscount : RegAxis::kL2;
    spec.sweep_values = name == "fig2a" ? discount_grid() : linspace(0.0, 0.0002, 11);
    spec.secondary_values = tv_targets;
  } else if (name == "fig2c" || name == "fig2d") {
    spec.experiment = Experiment::kMixing;
    spec.regularizer = name == "fig2c" ? RegAxis::kDiscount : RegAxis::kL2;
    spec.sweep_values = name == "fig2c" ? discount_grid() : linspace(0.0, 0.005, 11);
    spec.secondary_values = mixing_times;
    spec.n_traj = 2;
    spec.traj_len = 50;
  } else if (name == "fig3a" || name == "fig3b") {
    spec.experiment = Experiment::kPolicyOpt;
    spec.regularizer = name == "fig3a" ? RegAxis::kDiscount : RegAxis::kL2;
    spec.sweep_values = name == "fig3a" ? discount_grid() : linspace(0.0, 0.002, 11);
    spec.secondary_values = episode_counts;
    spec.traj_len = 10;
  } else if (name == "fig4") {
    spec.experiment = Experiment::kGrid2d;
    spec.sweep_values = discount_grid();
    spec.secondary_values = linspace(0.0, 0.002, 5);
    spec.n_traj = 8;
    spec.traj_len = 10;
  } else {
    throw std::invalid_argument("unknown figure preset '" + name + "'");
  }
  return spec;
}

namespace {

const char* to_string(RegAxis axis) { return axis == RegAxis::kDiscount ? "discount" : "l2"; }
const char* to_string(LossKind loss) { return loss == LossKind::kL2Value ? "l2" : "ranking"; }
const char* to_string(Evaluator e) {
  switch (e) {
    case Evaluator::kSarsa:
      return "sarsa";
    case Evaluator::kExpectedSarsa:
      return "expected_sarsa";
    case Evaluator::kLstdq:
      return "lstdq";
  }
  return "?";
}

template <typename Enum>
Enum parse_choice(const std::string& text, std::initializer_list<std::pair<const char*, Enum>> options,
                  const char* what) {
  for (const auto& [name, value] : options) {
    if (text == name) return value;
  }
  throw std::invalid_argument(std::string("unknown ") + what + " '" + text + "'");
}

}  // namespace

SweepSpec sweep_spec_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("sweep config must be a JSON object");
  SweepSpec spec;
  if (j.contains("preset")) spec = figure_preset(j.at("preset").get<std::string>());
  for (const auto& [key, value] : j.items()) {
    if (key == "preset") continue;
    if (key == "experiment") spec.experiment = experiment_from_string(value.get<std::string>());
    else if (key == "sweep_values") spec.sweep_values = value.get<std::vector<double>>();
    else if (key == "secondary_values") spec.secondary_values = value.get<std::vector<double>>();
    else if (key == "n_instances") spec.n_instances = value.get<std::size_t>();
    else if (key == "master_seed") spec.master_seed = value.get<std::uint64_t>();
    else if (key == "regularizer")
      spec.regularizer = parse_choice<RegAxis>(
          value.get<std::string>(), {{"discount", RegAxis::kDiscount}, {"l2", RegAxis::kL2}},
          "regularizer");
    else if (key == "loss")
      spec.loss = parse_choice<LossKind>(
          value.get<std::string>(), {{"l2", LossKind::kL2Value}, {"ranking", LossKind::kRanking}},
          "loss");
    else if (key == "gamma_eval") spec.gamma_eval = value.get<double>();
    else if (key == "grid_width") spec.grid.width = value.get<std::size_t>();
    else if (key == "grid_height") spec.grid.height = value.get<std::size_t>();
    else if (key == "goal_reward_mean") spec.grid.goal_reward_mean = value.get<double>();
    else if (key == "reward_mean_range") {
      const auto range = value.get<std::vector<double>>();
      if (range.size() != 2) throw std::invalid_argument("reward_mean_range needs two values");
      spec.grid.reward_mean_lo = range[0];
      spec.grid.reward_mean_hi = range[1];
    } else if (key == "reward_std") spec.grid.reward_std = value.get<double>();
    else if (key == "n_iter") spec.n_iter = value.get<std::size_t>();
    else if (key == "lr_numerator") spec.lr_numerator = value.get<double>();
    else if (key == "lr_offset") spec.lr_offset = value.get<double>();
    else if (key == "traj_len") spec.traj_len = value.get<std::size_t>();
    else if (key == "n_traj") spec.n_traj = value.get<std::size_t>();
    else if (key == "iid_samples") spec.iid_samples = value.get<std::size_t>();
    else if (key == "tv_tolerance") spec.tv_tolerance = value.get<double>();
    else if (key == "max_resamples") spec.max_resamples = value.get<std::size_t>();
    else if (key == "episodes") spec.episodes = value.get<std::size_t>();
    else if (key == "epsilon") spec.epsilon = value.get<double>();
    else if (key == "evaluator")
      spec.evaluator = parse_choice<Evaluator>(value.get<std::string>(),
                                               {{"sarsa", Evaluator::kSarsa},
                                                {"expected_sarsa", Evaluator::kExpectedSarsa},
                                                {"lstdq", Evaluator::kLstdq}},
                                               "evaluator");
    else if (key == "ridge_floor") spec.ridge_floor = value.get<double>();
    else throw std::invalid_argument("unknown sweep config key '" + key + "'");
  }
  spec.validate();
  return spec;
}

std::string sweep_spec_to_json(const SweepSpec& spec) {
  nlohmann::ordered_json j;
  j["experiment"] = to_string(spec.experiment);
  j["sweep_values"] = spec.sweep_values;
  j["secondary_values"] = spec.secondary_values;
  j["n_instances"] = spec.n_instances;
  j["master_seed"] = spec.master_seed;
  j["regularizer"] = to_string(spec.regularizer);
  j["loss"] = to_string(spec.loss);
  j["gamma_eval"] = spec.gamma_eval;
  j["grid_width"] = spec.grid.width;
  j["grid_height"] = spec.grid.height;
  j["goal_reward_mean"] = spec.grid.goal_reward_mean;
  j["reward_mean_range"] = {spec.grid.reward_mean_lo, spec.grid.reward_mean_hi};
  j["reward_std"] = spec.grid.reward_std;
  j["n_iter"] = spec.n_iter;
  j["lr_numerator"] = spec.lr_numerator;
  j["lr_offset"] = spec.lr_offset;
  j["traj_len"] = spec.traj_len;
  j["n_traj"] = spec.n_traj;
  j["iid_samples"] = spec.iid_samples;
  j["tv_tolerance"] = spec.tv_tolerance;
  j["max_resamples"] = spec.max_resamples;
  j["episodes"] = spec.episodes;
  j["epsilon"] = spec.epsilon;
  j["evaluator"] = to_string(spec.evaluator);
  j["ridge_floor"] = spec.ridge_floor;
  return j.dump(2);
}

SweepSpec load_sweep_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return sweep_spec_from_json(buffer.str());
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, std::size_t line) {
  double value = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw std::invalid_argument("bad number '" + std::string(field) + "' on line " +
                                std::to_string(line));
  }
  return value;
}

constexpr std::string_view kCsvHeader = "experiment,secondary,sweep,loss_mean,ci_low,ci_high,n_reps";

}  // namespace

std::string result_to_csv(const SweepResult& result) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& row : result.rows) {
    out += row.experiment + ',' + format_double(row.secondary) + ',' + format_double(row.sweep) +
           ',' + format_double(row.loss_mean) + ',' + format_double(row.ci_low) + ',' +
           format_double(row.ci_high) + ',' + std::to_string(row.n_reps) + '\n';
  }
  return out;
}

SweepResult result_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::invalid_argument("missing sweep CSV header");
  }
  SweepResult result;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 7) {
      throw std::invalid_argument("expected 7 fields on line " + std::to_string(line_no));
    }
    SweepRow row;
    row.experiment = std::string(fields[0]);
    row.secondary = parse_double(fields[1], line_no);
    row.sweep = parse_double(fields[2], line_no);
    row.loss_mean = parse_double(fields[3], line_no);
    row.ci_low = parse_double(fields[4], line_no);
    row.ci_high = parse_double(fields[5], line_no);
    const auto res = std::from_chars(fields[6].data(), fields[6].data() + fields[6].size(), row.n_reps);
    if (res.ec != std::errc() || res.ptr != fields[6].data() + fields[6].size()) {
      throw std::invalid_argument("bad n_reps on line " + std::to_string(line_no));
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

void emit_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << result_to_csv(result);
}

SweepResult load_result_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return result_from_csv(buffer.str());
}

}  // namespace discreg
