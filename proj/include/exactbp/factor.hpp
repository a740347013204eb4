#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "exactbp/model.hpp"

namespace exactbp {

inline constexpr std::size_t kDefaultScopeCap = 25;

/// Result scope would exceed the configured variable cap.
class ScopeOverflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scopes or cardinalities are incompatible with the requested operation.
class ScopeMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// x / 0 with x > 0 during division; a message and a marginal disagree.
class DivisionInconsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Normalizing a factor whose entries are all zero.
class ZeroMassError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense non-negative table over a sorted variable scope.
///
/// Entry k stands for values()[k] * exp(log_scale()). The table is laid out
/// with the last scope variable varying fastest.
class Factor {
 public:
  /// The constant 1 over the empty scope.
  Factor();
  Factor(std::vector<VarId> scope, std::vector<std::size_t> cardinalities, std::vector<double> values,
         double log_scale = 0.0);

  static Factor constant(double value, double log_scale = 0.0);
  static Factor ones(std::vector<VarId> scope, std::vector<std::size_t> cardinalities);

  const std::vector<VarId>& scope() const { return scope_; }
  const std::vector<std::size_t>& cardinalities() const { return cards_; }
  const std::vector<double>& values() const { return values_; }
  double log_scale() const { return log_scale_; }
  std::size_t size() const { return values_.size(); }

  bool contains(VarId u) const;
  std::size_t cardinality_of(VarId u) const;

  /// Flat index of an assignment given in scope order.
  std::size_t index(std::span<const std::size_t> states) const;
  /// Flat index of the entry selected by a full-network assignment.
  std::size_t index_from(const Assignment& x) const;
  /// Scope-ordered states of flat index k.
  std::vector<std::size_t> states_of(std::size_t k) const;

  double value(std::span<const std::size_t> states) const { return values_[index(states)]; }
  /// values()[k] * exp(log_scale()).
  double linear(std::size_t k) const;
  std::vector<double> linear_values() const;

  /// Sum of the stored values, ignoring log_scale.
  double mass() const;
  /// log(sum of linear entries); -inf for an all-zero table.
  double log_mass() const;

  /// Divides by the largest entry and folds it into log_scale. All-zero tables are returned unchanged.
  Factor rescaled() const;
  /// Same entries with log_scale folded into the values.
  Factor flattened() const;

 private:
  std::vector<VarId> scope_;
  std::vector<std::size_t> cards_;
  std::vector<double> values_;
  double log_scale_ = 0.0;
};

Factor multiply(const Factor& f, const Factor& g, std::size_t scope_cap = kDefaultScopeCap);
Factor marginalize_sum(const Factor& f, std::span<const VarId> drop);
Factor marginalize_max(const Factor& f, std::span<const VarId> drop);
/// Zeroes every entry whose assignment falls outside an evidence subset.
Factor restrict(const Factor& f, const EvidenceSet& ev);
/// Entrywise f / g with 0/0 = 0. scope(g) must be contained in scope(f).
Factor divide(const Factor& f, const Factor& g);

struct Normalized {
  Factor factor;
  double log_norm = 0.0;
};
Normalized normalize(const Factor& f);

/// Sub-table of f at fixed states for some scope variables; the fixed variables leave the scope.
Factor slice(const Factor& f, std::span<const VarId> vars, std::span<const std::size_t> states);

/// P(child | parents) laid out over the sorted family scope.
Factor cpd_factor(const DiscreteNetwork& net, VarId child);

}  // namespace exactbp
