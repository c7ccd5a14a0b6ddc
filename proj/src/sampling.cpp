#include "discreg/sampling.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace discreg {
namespace {

void check_shapes(const TabularMdp& mdp, const Policy& policy) {
  if (policy.n_states() != mdp.n_states() || policy.n_actions() != mdp.n_actions()) {
    throw std::invalid_argument("policy shape does not match MDP");
  }
}

std::size_t draw_action(const Policy& policy, std::size_t s, Rng& rng) {
  return sample_index(rng, policy.probs().row(static_cast<Eigen::Index>(s)).transpose());
}

// Reward, then next state. The draw order is part of the determinism contract.
std::pair<double, std::size_t> step(const TabularMdp& mdp, std::size_t s, std::size_t a, Rng& rng) {
  const auto si = static_cast<Eigen::Index>(s), ai = static_cast<Eigen::Index>(a);
  const double r = sample_normal(rng, mdp.reward_mean()(si, ai), mdp.reward_std()(si, ai));
  const std::size_t s_next = sample_index(rng, mdp.transition(a).row(si).transpose());
  return {r, s_next};
}

}  // namespace

std::vector<Transition> rollout(const TabularMdp& mdp, const Policy& policy, std::size_t length,
                                Rng& rng) {
  check_shapes(mdp, policy);
  if (length == 0) throw std::invalid_argument("rollout length must be at least 1");
  std::vector<Transition> out;
  out.reserve(length);
  std::size_t s = sample_index(rng, mdp.initial_dist());
  std::size_t a = draw_action(policy, s, rng);
  for (std::size_t t = 0; t < length; ++t) {
    const auto [r, s_next] = step(mdp, s, a, rng);
    const std::size_t a_next = draw_action(policy, s_next, rng);
    out.push_back({s, a, r, s_next, a_next});
    s = s_next;
    a = a_next;
  }
  return out;
}

TransitionDataset collect_trajectories(const TabularMdp& mdp, const Policy& policy,
                                       std::size_t n_traj, std::size_t traj_len, Rng& rng) {
  if (n_traj == 0 || traj_len == 0) throw std::invalid_argument("empty dataset requested");
  TransitionDataset data;
  data.provenance = TrajectoryProvenance{n_traj, traj_len};
  data.transitions.reserve(n_traj * traj_len);
  for (std::size_t k = 0; k < n_traj; ++k) {
    auto traj = rollout(mdp, policy, traj_len, rng);
    data.transitions.insert(data.transitions.end(), traj.begin(), traj.end());
  }
  return data;
}

TransitionDataset iid_dataset(const TabularMdp& mdp, const Policy& policy,
                              const Eigen::Ref<const Vector>& sa_dist, std::size_t n, Rng& rng,
                              std::string distribution_id) {
  check_shapes(mdp, policy);
  if (static_cast<std::size_t>(sa_dist.size()) != mdp.n_states() * mdp.n_actions()) {
    throw std::invalid_argument("state-action distribution has the wrong size");
  }
  if (n == 0) throw std::invalid_argument("empty dataset requested");
  TransitionDataset data;
  data.provenance = IidProvenance{std::move(distribution_id)};
  data.transitions.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t pair = sample_index(rng, sa_dist);
    const std::size_t s = pair / mdp.n_actions();
    const std::size_t a = pair % mdp.n_actions();
    const auto [r, s_next] = step(mdp, s, a, rng);
    data.transitions.push_back({s, a, r, s_next, draw_action(policy, s_next, rng)});
  }
  return data;
}

std::vector<Segment> extract_segments(const TransitionDataset& dataset, std::size_t m) {
  if (m == 0) throw std::invalid_argument("segment length must be at least 1");
  const auto* traj = std::get_if<TrajectoryProvenance>(&dataset.provenance);
  if (traj == nullptr) throw std::invalid_argument("m-step segments need trajectory data");
  if (traj->n_traj * traj->traj_len != dataset.size()) {
    throw std::invalid_argument("dataset size disagrees with its trajectory provenance");
  }
  std::vector<Segment> segments;
  for (std::size_t k = 0; k < traj->n_traj; ++k) {
    const std::size_t begin = k * traj->traj_len;
    for (std::size_t start = 0; start + m <= traj->traj_len; ++start) {
      Segment seg;
      seg.s = dataset[begin + start].s;
      seg.rewards.reserve(m);
      for (std::size_t t = 0; t < m; ++t) seg.rewards.push_back(dataset[begin + start + t].r);
      seg.s_end = dataset[begin + start + m - 1].s_next;
      segments.push_back(std::move(seg));
    }
  }
  return segments;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_field(std::string_view field, std::size_t line) {
  T value{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw std::invalid_argument("bad CSV field '" + std::string(field) + "' on line " +
                                std::to_string(line));
  }
  return value;
}

}  // namespace

std::string dataset_to_csv(const TransitionDataset& dataset) {
  std::string out = "s,a,r,s_next,a_next\n";
  for (const auto& t : dataset.transitions) {
    out += std::to_string(t.s) + ',' + std::to_string(t.a) + ',' + format_double(t.r) + ',' +
           std::to_string(t.s_next) + ',' + (t.a_next ? std::to_string(*t.a_next) : "") + '\n';
  }
  return out;
}

TransitionDataset dataset_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "s,a,r,s_next,a_next") {
    throw std::invalid_argument("missing dataset CSV header");
  }
  TransitionDataset data;
  data.provenance = IidProvenance{"csv"};
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
    if (fields.size() != 5) {
      throw std::invalid_argument("expected 5 fields on line " + std::to_string(line_no));
    }
    Transition t;
    t.s = parse_field<std::size_t>(fields[0], line_no);
    t.a = parse_field<std::size_t>(fields[1], line_no);
    t.r = parse_field<double>(fields[2], line_no);
    t.s_next = parse_field<std::size_t>(fields[3], line_no);
    if (!fields[4].empty()) t.a_next = parse_field<std::size_t>(fields[4], line_no);
    data.transitions.push_back(t);
  }
  return data;
}

void save_dataset_csv(const TransitionDataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << dataset_to_csv(dataset);
}

TransitionDataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return dataset_from_csv(buffer.str());
}

Vector empirical_state_frequencies(const TransitionDataset& dataset, std::size_t n_states) {
  Vector freq = Vector::Zero(static_cast<Eigen::Index>(n_states));
  if (dataset.empty()) return freq;
  for (const auto& t : dataset.transitions) {
    if (t.s >= n_states) throw std::out_of_range("state index out of range");
    freq[static_cast<Eigen::Index>(t.s)] += 1.0;
  }
  return freq / static_cast<double>(dataset.size());
}

}  // namespace discreg
