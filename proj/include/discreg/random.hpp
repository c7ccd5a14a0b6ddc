#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace discreg {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Order-sensitive stable combination of 64-bit words. Identical on every platform.
std::uint64_t combine_seed(std::initializer_list<std::uint64_t> words);

/// FNV-1a over the bytes of text.
std::uint64_t hash_text(std::string_view text);

/// Draws an index from a probability vector by inverse CDF.
std::size_t sample_index(Rng& rng, const Eigen::Ref<const Eigen::VectorXd>& probs);

double sample_uniform(Rng& rng, double lo, double hi);
double sample_normal(Rng& rng, double mean, double stddev);

/// Symmetric Dirichlet draw with the given concentration.
Eigen::VectorXd sample_dirichlet(Rng& rng, std::size_t n, double concentration);

}  // namespace discreg
