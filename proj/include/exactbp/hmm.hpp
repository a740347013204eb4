#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "exactbp/jtree.hpp"
#include "exactbp/model.hpp"

namespace exactbp::hmm {

/// Two-state (by default) hidden Markov chain with Poisson emissions.
struct HmmSpec {
  std::vector<std::string> states{"L", "H"};
  /// Distribution of S_1.
  std::vector<double> initial{0.0, 1.0};
  /// transition[r][s] = P(S_i = s | S_{i-1} = r)
  std::vector<std::vector<double>> transition{{0.9, 0.1}, {0.3, 0.7}};
  /// Poisson mean of Y_i given each state.
  std::vector<double> rates{3.0, 0.5};
  std::size_t horizon = 100;

  std::size_t num_states() const { return states.size(); }
  /// Throws std::invalid_argument on malformed parameters.
  void validate() const;
};

/// Precipitation model: S_1 = H, P(L|H) = 0.3, P(H|L) = 0.1, rates 3.0 (L) and 0.5 (H).
HmmSpec precipitation_model(std::size_t days = 100);

/// e_s(k) = exp(-rate_s) rate_s^k / k!
double emission(const HmmSpec& spec, std::size_t s, unsigned k);

/// Rows of non-negative values, each carrying its own log-scale: entry (i, s) = values[i][s] * exp(log_scale[i]).
struct ScaledTable {
  std::vector<std::vector<double>> values;
  std::vector<double> log_scale;

  double at(std::size_t i, std::size_t s) const;
  double log_at(std::size_t i, std::size_t s) const;
};

/// F_i(s) = P(S_i = s, Y_{1:i}), rows rescaled to max 1.
ScaledTable forward(const HmmSpec& spec, const std::vector<unsigned>& y);
/// B_i(s) = P(Y_{i+1:n} | S_i = s) with B_n = 1, rows rescaled to max 1.
ScaledTable backward(const HmmSpec& spec, const std::vector<unsigned>& y);

struct ForwardBackward {
  ScaledTable forward;
  ScaledTable backward;
};
ForwardBackward forward_backward(const HmmSpec& spec, const std::vector<unsigned>& y);

/// log P(Y_{1:n}) read at step i (identical for every i up to rounding).
double log_likelihood(const ForwardBackward& fb, std::size_t i);

/// P(S_i | Y_{1:n}) for 0-based step i. Throws std::domain_error when the likelihood is zero.
std::vector<double> posterior(const ForwardBackward& fb, std::size_t i);

/// Emission domain kept when the chain is expressed as a Bayesian network.
inline constexpr unsigned kEmissionCutoff = 40;

/// The chain as a Bayesian network with observations as evidence.
struct HmmNetwork {
  DiscreteNetwork net;
  EvidenceSet evidence;
  std::vector<VarId> hidden;    ///< S_1..S_n
  std::vector<VarId> observed;  ///< Y_1..Y_n
};

/// Variables are interleaved S1, Y1, S2, Y2, ...; Y has states "0".."cutoff".
/// Throws std::out_of_range when an observation exceeds the cutoff. All HMM routines expect
/// exactly spec.horizon observations.
HmmNetwork to_bayes_net(const HmmSpec& spec, const std::vector<unsigned>& y, unsigned cutoff = kEmissionCutoff);

/// Chained clusters {S1,Y1}, {S1,S2,Y2}, ..., {S_{n-1},S_n,Y_n}, with S_i and Y_i owned by cluster i.
JunctionTree chain_junction_tree(const HmmNetwork& hnet);

struct Trajectory {
  std::vector<std::size_t> states;
  std::vector<unsigned> observations;
};

/// One draw of (S_{1:n}, Y_{1:n}). Deterministic per seed.
Trajectory simulate(const HmmSpec& spec, std::uint64_t seed);

}  // namespace exactbp::hmm
