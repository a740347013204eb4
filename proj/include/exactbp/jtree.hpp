#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "exactbp/model.hpp"

namespace exactbp {

using ClusterId = std::size_t;
using Edge = std::pair<ClusterId, ClusterId>;

/// Clusters of variables linked into a tree, plus the owning cluster cl(u) of every variable.
///
/// Cluster members are kept sorted. `assignment[u]` is the cluster whose potential
/// receives K_u; it may be left empty and filled later by assign_clusters().
struct JunctionTree {
  std::vector<std::vector<VarId>> clusters;
  std::vector<Edge> edges;
  std::vector<ClusterId> assignment;

  std::size_t size() const { return clusters.size(); }
  /// Neighbour lists, each sorted ascending.
  std::vector<std::vector<ClusterId>> neighbors() const;
  bool has_edge(ClusterId i, ClusterId j) const;
  std::vector<VarId> separator(ClusterId i, ClusterId j) const;
  /// Variables u with cl(u) = j.
  std::vector<VarId> owned(ClusterId j) const;
  std::size_t max_cluster_size() const;
};

/// No cluster contains the family of a variable.
class CoveringError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sets describing one directed edge i -> j.
struct EdgeContext {
  std::vector<VarId> separator;  ///< S_{i,j}
  std::vector<VarId> upstream;   ///< U_{i->j}: variables owned on the i side
  std::vector<VarId> local;      ///< L_{i->j} = U ∩ S
  std::vector<VarId> summed;     ///< V_{i->j} = U \ S
};

/// Moralize, eliminate by min-fill, keep maximal cliques, join them with a
/// maximum-weight spanning tree, then assign clusters.
JunctionTree build_junction_tree(const DiscreteNetwork& net);

/// Checks JT1 (tree), JT2 (running intersection), JT3 (covering) and the assignment
/// when one is present.
ValidationReport validate_junction_tree(const DiscreteNetwork& net, const JunctionTree& jt);

/// cl(u): smallest cluster containing fa(u), ties to the lowest index. Throws CoveringError.
std::vector<ClusterId> assign_clusters(const DiscreteNetwork& net, const JunctionTree& jt);

/// Throws std::invalid_argument when i - j is not a tree edge.
EdgeContext edge_context(const JunctionTree& jt, ClusterId from, ClusterId to);

/// Clusters on the `from` side of edge from - to, including `from`.
std::vector<ClusterId> subtree_clusters(const JunctionTree& jt, ClusterId from, ClusterId to);

/// Unique cluster path from i to j (inclusive); empty when disconnected.
std::vector<ClusterId> tree_path(const JunctionTree& jt, ClusterId i, ClusterId j);

/// Parent pointers and a breadth-first order for the tree rooted at `root`
/// (children visited in ascending index order).
struct RootedTree {
  ClusterId root = 0;
  std::vector<std::optional<ClusterId>> parent;
  std::vector<std::vector<ClusterId>> children;
  std::vector<ClusterId> bfs_order;
};
RootedTree root_tree(const JunctionTree& jt, ClusterId root);

}  // namespace exactbp
