#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "exactbp/factor.hpp"
#include "exactbp/hmm.hpp"
#include "exactbp/jtree.hpp"
#include "exactbp/propagation.hpp"
#include "exactbp/random.hpp"

namespace exactbp {

/// A cluster conditional lost its mass although its separator assignment is reachable.
class SamplingConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// P(X_{C_j \ S} | X_S = sep_states, evidence), where S is the separator
/// towards `parent`, or empty at the root. The numerator is the cluster
/// potential times every incoming message except the parent's; the
/// denominator is M_{j->parent}(sep_states), or P(evidence) at the root.
/// The returned factor is flattened (log_scale 0) over the free variables.
Factor cluster_conditional(const CompiledQuery& cq, ClusterId j, std::optional<ClusterId> parent,
                           std::span<const std::size_t> sep_states);

/// Exact draws from P(X | evidence) by top-down sampling of a rooted junction tree.
///
/// Needs every message pointing towards `root` (a calibrated query has them
/// for any root). Clusters are visited depth-first with children in
/// ascending index order, so a seed fixes the whole stream.
class PosteriorSampler {
 public:
  PosteriorSampler(const CompiledQuery& cq, ClusterId root, std::uint64_t seed);

  Assignment draw();
  std::vector<Assignment> draw(std::size_t count);
  /// Samples only the clusters needed to reach `targets`; other entries stay empty.
  std::vector<std::optional<std::size_t>> draw_subset(std::span<const VarId> targets);

 private:
  struct ClusterTable {
    std::vector<VarId> separator;
    std::vector<std::size_t> separator_cards;
    std::vector<VarId> free;
    std::vector<std::size_t> free_cards;
    /// One conditional row per separator assignment; empty rows are unreachable.
    std::vector<std::vector<double>> rows;
  };

  void sample_cluster(ClusterId j, std::vector<std::optional<std::size_t>>& x);

  const CompiledQuery& cq_;
  RootedTree tree_;
  std::vector<ClusterId> preorder_;
  std::vector<ClusterTable> tables_;
  Rng rng_;
};

std::vector<Assignment> sample_posterior(const CompiledQuery& cq, ClusterId root, std::uint64_t seed,
                                         std::size_t count);

enum class PathDirection { Forward, Backward };

/// P(S_i = . | S_{i-1} = r, Y_{1:n}) for 0-based i >= 1, from the backward quantities.
std::vector<double> hmm_forward_transition(const hmm::HmmSpec& spec, const std::vector<unsigned>& y,
                                           const hmm::ForwardBackward& fb, std::size_t i, std::size_t r);
/// P(S_{i-1} = . | S_i = s, Y_{1:n}) for 0-based i >= 1, from the forward quantities.
std::vector<double> hmm_backward_transition(const hmm::HmmSpec& spec, const std::vector<unsigned>& y,
                                            const hmm::ForwardBackward& fb, std::size_t i, std::size_t s);

/// One draw of S_{1:n} given Y_{1:n}, walking the chain in the given direction.
std::vector<std::size_t> sample_hmm_path(const hmm::HmmSpec& spec, const std::vector<unsigned>& y,
                                         const hmm::ForwardBackward& fb, PathDirection direction, Rng& rng);
std::vector<std::size_t> sample_hmm_path(const hmm::HmmSpec& spec, const std::vector<unsigned>& y,
                                         PathDirection direction, std::uint64_t seed);

}  // namespace exactbp
