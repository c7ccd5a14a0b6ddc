#pragma once

#include <stdexcept>

#include "discreg/mdp.hpp"
#include "discreg/sampling.hpp"
#include "discreg/td.hpp"

namespace discreg {

/// A theta = b with A = (1/N) sum phi (phi - gamma phi')^T + lambda I and b = (1/N) sum r phi.
struct LstdSystem {
  Matrix a;
  Vector b;
  std::size_t n = 0;
};

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Builds the LSTD system for state features.
LstdSystem lstd_system(const TransitionDataset& dataset, const FeatureMap& features, double gamma,
                       double lambda_l2);

/// Builds the LSTDQ system; phi' is the policy-weighted average of phi(s', a').
LstdSystem lstdq_system(const TransitionDataset& dataset, const FeatureMap& sa_features,
                        const Policy& policy, double gamma, double lambda_l2);

/// Solves the system; throws SingularSystemError when A is not invertible.
Vector solve_lstd(const LstdSystem& system);

Vector lstd(const TransitionDataset& dataset, const FeatureMap& features, double gamma,
            double lambda_l2);

Vector lstdq(const TransitionDataset& dataset, const FeatureMap& sa_features, const Policy& policy,
             double gamma, double lambda_l2);

/// A(gamma) = high_discount + (gamma_eval - gamma) * cross.
struct LstdDecomposition {
  Matrix high_discount;  // (1/N) sum phi (phi - gamma_eval phi')^T
  Matrix cross;          // (1/N) sum phi phi'^T
};

LstdDecomposition lstd_decompose(const TransitionDataset& dataset, const FeatureMap& features,
                                 double gamma, double gamma_eval);

}  // namespace discreg
