#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "exactbp/factor.hpp"
#include "exactbp/jtree.hpp"
#include "exactbp/model.hpp"

namespace exactbp {

enum class Semiring { SumProduct, MaxProduct };

/// A message was requested before the messages it depends on were computed.
class SchedulingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The evidence has probability zero, so a conditional quantity is undefined.
class ImpossibleEvidenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Network, evidence or junction tree failed validation.
class InvalidModelError : public std::invalid_argument {
 public:
  InvalidModelError(const std::string& what, ValidationReport report)
      : std::invalid_argument(what), report_(std::move(report)) {}
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

struct PropagationOptions {
  ClusterId root = 0;
  /// Rescale every message to max entry 1, keeping the factor in its log_scale.
  bool renormalize = true;
  std::size_t scope_cap = kDefaultScopeCap;
};

/// Directed-edge messages, one table per semiring.
class MessageStore {
 public:
  bool has(Semiring s, ClusterId from, ClusterId to) const;
  /// Throws SchedulingError when absent.
  const Factor& get(Semiring s, ClusterId from, ClusterId to) const;
  void put(Semiring s, ClusterId from, ClusterId to, Factor message);
  std::size_t count(Semiring s) const;

 private:
  std::map<std::tuple<Semiring, ClusterId, ClusterId>, Factor> messages_;
};

/// K_u = 1{evidence on u} * P(X_u | X_pa(u)), one factor per variable, scope fa(u).
std::vector<Factor> build_potentials(const DiscreteNetwork& net, const EvidenceSet& ev);

struct MapResult {
  Assignment assignment;
  /// log max_x P(x, evidence)
  double log_value = 0.0;
};

/// A network with evidence bound to a junction tree, plus the messages computed on it.
///
/// Construction validates all three inputs and builds K_u and the cluster
/// potentials. Messages are filled by inward()/outward() (or calibrate());
/// once calibrated, every query is const and may run concurrently.
class CompiledQuery {
 public:
  /// Throws InvalidModelError. An empty jt.assignment is filled by assign_clusters().
  CompiledQuery(DiscreteNetwork net, EvidenceSet ev, JunctionTree jt, PropagationOptions options = {});

  const DiscreteNetwork& network() const { return net_; }
  const EvidenceSet& evidence() const { return ev_; }
  const JunctionTree& junction_tree() const { return jt_; }
  const PropagationOptions& options() const { return options_; }
  const MessageStore& messages() const { return store_; }
  const std::vector<std::vector<ClusterId>>& neighbors() const { return neighbors_; }

  /// K_u
  const Factor& potential(VarId u) const { return potentials_.at(u); }
  /// Phi_j: product of K_u over the variables owned by cluster j (constant 1 when none).
  const Factor& cluster_potential(ClusterId j) const { return cluster_potentials_.at(j); }

  /// M_{from->to} from the cluster potential and every other incoming message.
  void compute_message(ClusterId from, ClusterId to, Semiring s = Semiring::SumProduct);
  std::vector<Edge> inward_schedule(ClusterId root) const;
  std::vector<Edge> outward_schedule(ClusterId root) const;
  void inward(ClusterId root, Semiring s = Semiring::SumProduct);
  void outward(ClusterId root, Semiring s = Semiring::SumProduct);
  /// inward + outward sum-product messages at options().root.
  void calibrate();
  /// inward + outward max-product messages at `root`.
  void max_messages(ClusterId root);

  /// P(X_{S_ij}, evidence) = M_{i->j} * M_{j->i}
  Factor edge_marginal(ClusterId i, ClusterId j, Semiring s = Semiring::SumProduct) const;
  /// P(X_{C_j}, evidence) = Phi_j * product of incoming messages, over the full cluster scope.
  Factor cluster_marginal(ClusterId j, Semiring s = Semiring::SumProduct) const;

  /// log P(evidence), read from the root of the last inward pass; -inf when impossible.
  double log_evidence_probability() const;
  double log_evidence_probability_at(ClusterId j) const;

  /// P(X_u | evidence), read from cluster cl(u). Throws ImpossibleEvidenceError.
  std::vector<double> variable_posterior(VarId u) const;

  /// Most probable joint assignment under the evidence, decoded from the max
  /// messages of the last max_messages() root. Ties resolve to the lowest state index.
  MapResult map_assignment() const;

 private:
  Factor incoming_product(ClusterId j, Semiring s, std::optional<ClusterId> except) const;

  DiscreteNetwork net_;
  EvidenceSet ev_;
  JunctionTree jt_;
  PropagationOptions options_;
  std::vector<std::vector<ClusterId>> neighbors_;
  std::vector<Factor> potentials_;
  std::vector<Factor> cluster_potentials_;
  MessageStore store_;
  std::optional<ClusterId> sum_root_;
  std::optional<ClusterId> max_root_;
};

/// Builds a junction tree when none is given, then runs the sum-product inward and outward passes.
CompiledQuery calibrated_query(const DiscreteNetwork& net, const EvidenceSet& ev,
                               std::optional<JunctionTree> jt = std::nullopt, PropagationOptions options = {});

}  // namespace exactbp
