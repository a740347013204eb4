#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace exactbp {

/// Index of a variable inside its network (position in DiscreteNetwork::variables()).
using VarId = std::size_t;

/// A full or partial joint assignment: one state index per variable id.
using Assignment = std::vector<std::size_t>;

struct Variable {
  std::string name;
  std::vector<std::string> states;

  std::size_t cardinality() const { return states.size(); }
  std::optional<std::size_t> state_index(std::string_view label) const;
};

/// Conditional probability table P(child | parents).
///
/// One row per parent combination, rows enumerated with the last listed
/// parent varying fastest; one column per child state.
struct Cpd {
  VarId child = 0;
  std::vector<VarId> parents;
  std::vector<std::vector<double>> table;
};

class DiscreteNetwork {
 public:
  DiscreteNetwork() = default;
  DiscreteNetwork(std::vector<Variable> variables, std::vector<Cpd> cpds);

  std::size_t size() const { return variables_.size(); }
  const std::vector<Variable>& variables() const { return variables_; }
  const Variable& variable(VarId u) const { return variables_.at(u); }
  std::size_t cardinality(VarId u) const { return variables_.at(u).cardinality(); }
  std::vector<std::size_t> cardinalities(std::span<const VarId> ids) const;

  const std::vector<Cpd>& cpds() const { return cpds_; }
  /// The CPD whose child is u. Throws std::out_of_range when u has none.
  const Cpd& cpd(VarId u) const;
  bool has_cpd(VarId u) const;

  std::optional<VarId> find(std::string_view name) const;

 private:
  std::vector<Variable> variables_;
  std::vector<Cpd> cpds_;
  std::vector<std::optional<std::size_t>> cpd_of_;
};

enum class ViolationKind {
  // network
  EmptyDomain,
  DuplicateState,
  DuplicateVariableName,
  MissingCpd,
  DuplicateCpd,
  DanglingParent,
  DuplicateParent,
  SelfParent,
  BadTableShape,
  BadProbability,
  BadRowSum,
  Cycle,
  // evidence
  UnknownVariable,
  UnknownState,
  // junction tree
  Tree,
  RunningIntersection,
  Covering,
  Assignment,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  /// Offending variable or cluster indices, depending on the kind.
  std::vector<std::size_t> witness;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationKind kind) const;
};

inline constexpr double kRowSumTolerance = 1e-9;

ValidationReport validate_network(const DiscreteNetwork& net);

/// Kahn order with the lowest ready id first; nullopt when the parent graph has a cycle.
std::optional<std::vector<VarId>> topological_order(const DiscreteNetwork& net);

/// fa(u) = pa(u) plus u, sorted ascending.
std::vector<VarId> family(const DiscreteNetwork& net, VarId u);

/// Allowed-state subsets per variable. Variables without an entry are unconstrained.
class EvidenceSet {
 public:
  /// Replaces the allowed set of u. An empty set is legal and makes the evidence impossible.
  void allow(VarId u, std::vector<std::size_t> states);
  void observe(VarId u, std::size_t state) { allow(u, {state}); }

  bool constrains(VarId u) const { return allowed_.contains(u); }
  bool allows(VarId u, std::size_t state) const;
  bool allows(const Assignment& x) const;
  bool empty() const { return allowed_.empty(); }

  const std::map<VarId, std::vector<std::size_t>>& entries() const { return allowed_; }

 private:
  std::map<VarId, std::vector<std::size_t>> allowed_;
};

ValidationReport validate_evidence(const DiscreteNetwork& net, const EvidenceSet& ev);

/// P(x) * 1{x in evidence}, evaluated as the product of CPD entries in variable-id order.
double joint_probability(const DiscreteNetwork& net, const EvidenceSet& ev, const Assignment& x);

/// Row of u's CPD selected by the parent states in x.
std::size_t cpd_row(const DiscreteNetwork& net, const Cpd& cpd, const Assignment& x);

}  // namespace exactbp
