#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "exactbp/jtree.hpp"
#include "exactbp/model.hpp"

namespace exactbp::testing {

std::string data_path(const std::string& name);

/// The ten-individual pedigree, its evidence and the hand-built seven-cluster tree.
struct Pedigree {
  DiscreteNetwork net;
  EvidenceSet evidence;
  JunctionTree jt;

  VarId x(int k) const { return static_cast<VarId>(k - 1); }
};
const Pedigree& pedigree();

/// Genotype state indices.
inline constexpr std::size_t dd = 0, dD = 1, DD = 2;

struct RandomNetworkOptions {
  std::size_t min_vars = 1;
  std::size_t max_vars = 8;
  std::size_t max_states = 3;
  std::size_t max_parents = 3;
  double edge_probability = 0.45;
  /// Chance that a CPD entry is forced to zero (rows keep positive mass).
  double zero_probability = 0.1;
};

/// Random DAG over a shuffled order; parents listed in random order.
DiscreteNetwork random_network(std::mt19937_64& gen, const RandomNetworkOptions& opts = {});

/// Each variable is constrained with probability `p`, to a random non-empty subset.
EvidenceSet random_evidence(std::mt19937_64& gen, const DiscreteNetwork& net, double p = 0.35);

/// |a - b| <= tol * max(|a|, |b|); two zeros compare equal.
inline bool close_rel(double a, double b, double tol) {
  return a == b || std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

/// Relative agreement of two probabilities given by their logs.
inline bool close_log(double log_a, double log_b, double tol) {
  return log_a == log_b || std::abs(log_a - log_b) <= tol;
}

/// A -> B chain, the smallest non-trivial network.
DiscreteNetwork chain_ab();

}  // namespace exactbp::testing
