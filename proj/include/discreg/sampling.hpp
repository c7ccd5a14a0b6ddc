#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "discreg/mdp.hpp"
#include "discreg/random.hpp"

namespace discreg {

struct Transition {
  std::size_t s = 0;
  std::size_t a = 0;
  double r = 0.0;
  std::size_t s_next = 0;
  /// Next action, recorded for on-policy data.
  std::optional<std::size_t> a_next;

  bool operator==(const Transition&) const = default;
};

struct TrajectoryProvenance {
  std::size_t n_traj = 0;
  std::size_t traj_len = 0;
  bool operator==(const TrajectoryProvenance&) const = default;
};

struct IidProvenance {
  std::string distribution_id;
  bool operator==(const IidProvenance&) const = default;
};

/// A finite batch of transitions: the learner's only view of the environment.
struct TransitionDataset {
  std::vector<Transition> transitions;
  std::variant<TrajectoryProvenance, IidProvenance> provenance;

  std::size_t size() const { return transitions.size(); }
  bool empty() const { return transitions.empty(); }
  const Transition& operator[](std::size_t i) const { return transitions[i]; }
  bool operator==(const TransitionDataset&) const = default;
};

/**
 * Simulates one trajectory of the given length from s0 ~ initial_dist.
 * Each transition stores a_next, the action actually taken at the next step.
 */
std::vector<Transition> rollout(const TabularMdp& mdp, const Policy& policy, std::size_t length,
                                Rng& rng);

/// n_traj independent rollouts concatenated in order. Throws on an empty result.
TransitionDataset collect_trajectories(const TabularMdp& mdp, const Policy& policy,
                                       std::size_t n_traj, std::size_t traj_len, Rng& rng);

/**
 * n i.i.d. samples: (s, a) ~ sa_dist over the flattened index s * n_actions + a,
 * reward and s' from the model, a_next ~ policy(s').
 */
TransitionDataset iid_dataset(const TabularMdp& mdp, const Policy& policy,
                              const Eigen::Ref<const Vector>& sa_dist, std::size_t n, Rng& rng,
                              std::string distribution_id = "custom");

/// One m-step segment: start state, m rewards, and the state reached after m steps.
struct Segment {
  std::size_t s = 0;
  std::vector<double> rewards;
  std::size_t s_end = 0;
};

/**
 * Overlapping stride-1 windows of m consecutive transitions inside each
 * trajectory. Windows that would run past a trajectory end are dropped.
 * Requires trajectory provenance.
 */
std::vector<Segment> extract_segments(const TransitionDataset& dataset, std::size_t m);

// CSV with header s,a,r,s_next,a_next; a missing a_next is an empty field.
std::string dataset_to_csv(const TransitionDataset& dataset);
TransitionDataset dataset_from_csv(const std::string& text);
void save_dataset_csv(const TransitionDataset& dataset, const std::string& path);
TransitionDataset load_dataset_csv(const std::string& path);

/// Fraction of transitions out of each state.
Vector empirical_state_frequencies(const TransitionDataset& dataset, std::size_t n_states);

}  // namespace discreg
