#include "discreg/random.hpp"

#include <stdexcept>

namespace discreg {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t combine_seed(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t w : words) h = mix64(h ^ mix64(w));
  return h;
}

std::uint64_t hash_text(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t sample_index(Rng& rng, const Eigen::Ref<const Eigen::VectorXd>& probs) {
  if (probs.size() == 0) throw std::invalid_argument("cannot sample from an empty distribution");
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cumulative = 0.0;
  Eigen::Index last_positive = 0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = i;
    cumulative += probs[i];
    if (u < cumulative) return static_cast<std::size_t>(i);
  }
  // Round-off left u above the accumulated mass.
  return static_cast<std::size_t>(last_positive);
}

double sample_uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double sample_normal(Rng& rng, double mean, double stddev) {
  if (stddev == 0.0) return mean;
  return std::normal_distribution<double>(mean, stddev)(rng);
}

Eigen::VectorXd sample_dirichlet(Rng& rng, std::size_t n, double concentration) {
  if (n == 0 || !(concentration > 0.0)) throw std::invalid_argument("bad Dirichlet parameters");
  Eigen::VectorXd draw(static_cast<Eigen::Index>(n));
  std::gamma_distribution<double> gamma(concentration, 1.0);
  for (Eigen::Index i = 0; i < draw.size(); ++i) draw[i] = gamma(rng);
  const double total = draw.sum();
  if (!(total > 0.0)) {
    // All gamma draws underflowed; fall back to a point mass.
    draw.setZero();
    draw[static_cast<Eigen::Index>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng))] = 1.0;
    return draw;
  }
  return draw / total;
}

}  // namespace discreg
