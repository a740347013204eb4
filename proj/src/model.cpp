#include "exactbp/model.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>

namespace exactbp {

std::optional<std::size_t> Variable::state_index(std::string_view label) const {
  auto it = std::find(states.begin(), states.end(), label);
  if (it == states.end()) return std::nullopt;
  return static_cast<std::size_t>(it - states.begin());
}

DiscreteNetwork::DiscreteNetwork(std::vector<Variable> variables, std::vector<Cpd> cpds)
    : variables_(std::move(variables)), cpds_(std::move(cpds)), cpd_of_(variables_.size()) {
  for (std::size_t k = 0; k < cpds_.size(); ++k) {
    VarId child = cpds_[k].child;
    if (child < cpd_of_.size() && !cpd_of_[child]) cpd_of_[child] = k;
  }
}

std::vector<std::size_t> DiscreteNetwork::cardinalities(std::span<const VarId> ids) const {
  std::vector<std::size_t> cards;
  cards.reserve(ids.size());
  for (VarId u : ids) cards.push_back(cardinality(u));
  return cards;
}

bool DiscreteNetwork::has_cpd(VarId u) const { return u < cpd_of_.size() && cpd_of_[u].has_value(); }

const Cpd& DiscreteNetwork::cpd(VarId u) const {
  if (!has_cpd(u)) throw std::out_of_range("no CPD for variable " + std::to_string(u));
  return cpds_[*cpd_of_[u]];
}

std::optional<VarId> DiscreteNetwork::find(std::string_view name) const {
  for (VarId u = 0; u < variables_.size(); ++u)
    if (variables_[u].name == name) return u;
  return std::nullopt;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::EmptyDomain: return "empty-domain";
    case ViolationKind::DuplicateState: return "duplicate-state";
    case ViolationKind::DuplicateVariableName: return "duplicate-variable-name";
    case ViolationKind::MissingCpd: return "missing-cpd";
    case ViolationKind::DuplicateCpd: return "duplicate-cpd";
    case ViolationKind::DanglingParent: return "dangling-parent";
    case ViolationKind::DuplicateParent: return "duplicate-parent";
    case ViolationKind::SelfParent: return "self-parent";
    case ViolationKind::BadTableShape: return "bad-table-shape";
    case ViolationKind::BadProbability: return "bad-probability";
    case ViolationKind::BadRowSum: return "bad-row-sum";
    case ViolationKind::Cycle: return "cycle";
    case ViolationKind::UnknownVariable: return "unknown-variable";
    case ViolationKind::UnknownState: return "unknown-state";
    case ViolationKind::Tree: return "JT1-tree";
    case ViolationKind::RunningIntersection: return "JT2-running-intersection";
    case ViolationKind::Covering: return "JT3-covering";
    case ViolationKind::Assignment: return "assignment";
  }
  return "unknown";
}

bool ValidationReport::has(ViolationKind kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [kind](const Violation& v) { return v.kind == kind; });
}

namespace {

// Kahn peel, lowest ready id first. Variables left with positive in-degree lie on or behind a cycle.
// Assumes every CPD references valid ids.
std::pair<std::vector<VarId>, std::vector<std::size_t>> kahn_order(const DiscreteNetwork& net) {
  std::vector<std::size_t> indeg(net.size(), 0);
  std::vector<std::vector<VarId>> children(net.size());
  for (const Cpd& cpd : net.cpds())
    for (VarId p : cpd.parents) {
      children[p].push_back(cpd.child);
      ++indeg[cpd.child];
    }
  std::priority_queue<VarId, std::vector<VarId>, std::greater<>> ready;
  for (VarId u = 0; u < net.size(); ++u)
    if (indeg[u] == 0) ready.push(u);
  std::vector<VarId> order;
  order.reserve(net.size());
  while (!ready.empty()) {
    VarId u = ready.top();
    ready.pop();
    order.push_back(u);
    for (VarId c : children[u])
      if (--indeg[c] == 0) ready.push(c);
  }
  return {std::move(order), std::move(indeg)};
}

void check_cpd(const DiscreteNetwork& net, const Cpd& cpd, ValidationReport& report) {
  const VarId child = cpd.child;
  const auto& name = net.variable(child).name;
  bool parents_ok = true;
  std::set<VarId> seen;
  for (VarId p : cpd.parents) {
    if (p >= net.size()) {
      report.violations.push_back({ViolationKind::DanglingParent, {child},
                                   "CPD of " + name + " references unknown parent id " + std::to_string(p)});
      parents_ok = false;
      continue;
    }
    if (p == child) {
      report.violations.push_back({ViolationKind::SelfParent, {child}, name + " lists itself as a parent"});
      parents_ok = false;
    }
    if (!seen.insert(p).second) {
      report.violations.push_back({ViolationKind::DuplicateParent, {child, p},
                                   name + " lists parent " + net.variable(p).name + " twice"});
      parents_ok = false;
    }
  }
  if (!parents_ok) return;

  std::size_t rows = 1;
  for (VarId p : cpd.parents) rows *= net.cardinality(p);
  const std::size_t cols = net.cardinality(child);
  if (cpd.table.size() != rows) {
    report.violations.push_back({ViolationKind::BadTableShape, {child},
                                 name + ": expected " + std::to_string(rows) + " rows, got " +
                                     std::to_string(cpd.table.size())});
    return;
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& row = cpd.table[r];
    if (row.size() != cols) {
      report.violations.push_back({ViolationKind::BadTableShape, {child, r},
                                   name + " row " + std::to_string(r) + ": expected " + std::to_string(cols) +
                                       " entries, got " + std::to_string(row.size())});
      continue;
    }
    double sum = 0.0;
    bool values_ok = true;
    for (double v : row) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) values_ok = false;
      sum += v;
    }
    if (!values_ok) {
      report.violations.push_back({ViolationKind::BadProbability, {child, r},
                                   name + " row " + std::to_string(r) + " has an entry outside [0,1]"});
    } else if (std::abs(sum - 1.0) > kRowSumTolerance) {
      report.violations.push_back({ViolationKind::BadRowSum, {child, r},
                                   name + " row " + std::to_string(r) + " sums to " + std::to_string(sum)});
    }
  }
}

}  // namespace

ValidationReport validate_network(const DiscreteNetwork& net) {
  ValidationReport report;
  std::set<std::string> names;
  for (VarId u = 0; u < net.size(); ++u) {
    const Variable& var = net.variable(u);
    if (!names.insert(var.name).second)
      report.violations.push_back({ViolationKind::DuplicateVariableName, {u}, "duplicate variable name " + var.name});
    if (var.states.empty())
      report.violations.push_back({ViolationKind::EmptyDomain, {u}, var.name + " has no states"});
    std::set<std::string> labels;
    for (const auto& s : var.states)
      if (!labels.insert(s).second)
        report.violations.push_back({ViolationKind::DuplicateState, {u}, var.name + " repeats state " + s});
  }

  std::vector<int> cpd_count(net.size(), 0);
  for (const Cpd& cpd : net.cpds()) {
    if (cpd.child >= net.size()) {
      report.violations.push_back({ViolationKind::DanglingParent, {cpd.child},
                                   "CPD for unknown variable id " + std::to_string(cpd.child)});
      continue;
    }
    if (++cpd_count[cpd.child] == 2)
      report.violations.push_back({ViolationKind::DuplicateCpd, {cpd.child},
                                   net.variable(cpd.child).name + " has more than one CPD"});
  }
  for (VarId u = 0; u < net.size(); ++u) {
    if (cpd_count[u] == 0)
      report.violations.push_back({ViolationKind::MissingCpd, {u}, net.variable(u).name + " has no CPD"});
    else
      check_cpd(net, net.cpd(u), report);
  }

  if (report.has(ViolationKind::DanglingParent)) return report;
  auto [order, indeg] = kahn_order(net);
  if (order.size() != net.size()) {
    std::vector<std::size_t> on_cycle;
    std::string names_on_cycle;
    for (VarId u = 0; u < net.size(); ++u)
      if (indeg[u] > 0) {
        on_cycle.push_back(u);
        names_on_cycle += (names_on_cycle.empty() ? "" : " ") + net.variable(u).name;
      }
    report.violations.push_back({ViolationKind::Cycle, on_cycle, "directed cycle through " + names_on_cycle});
  }
  return report;
}

std::optional<std::vector<VarId>> topological_order(const DiscreteNetwork& net) {
  for (const Cpd& cpd : net.cpds()) {
    if (cpd.child >= net.size()) return std::nullopt;
    for (VarId p : cpd.parents)
      if (p >= net.size()) return std::nullopt;
  }
  auto [order, indeg] = kahn_order(net);
  if (order.size() != net.size()) return std::nullopt;
  return order;
}

std::vector<VarId> family(const DiscreteNetwork& net, VarId u) {
  if (u >= net.size()) throw std::out_of_range("unknown variable id " + std::to_string(u));
  std::vector<VarId> fa = net.cpd(u).parents;
  fa.push_back(u);
  std::sort(fa.begin(), fa.end());
  fa.erase(std::unique(fa.begin(), fa.end()), fa.end());
  return fa;
}

void EvidenceSet::allow(VarId u, std::vector<std::size_t> states) {
  std::sort(states.begin(), states.end());
  states.erase(std::unique(states.begin(), states.end()), states.end());
  allowed_[u] = std::move(states);
}

bool EvidenceSet::allows(VarId u, std::size_t state) const {
  auto it = allowed_.find(u);
  if (it == allowed_.end()) return true;
  return std::binary_search(it->second.begin(), it->second.end(), state);
}

bool EvidenceSet::allows(const Assignment& x) const {
  for (const auto& [u, states] : allowed_) {
    if (u >= x.size()) continue;
    if (!std::binary_search(states.begin(), states.end(), x[u])) return false;
  }
  return true;
}

ValidationReport validate_evidence(const DiscreteNetwork& net, const EvidenceSet& ev) {
  ValidationReport report;
  for (const auto& [u, states] : ev.entries()) {
    if (u >= net.size()) {
      report.violations.push_back({ViolationKind::UnknownVariable, {u},
                                   "evidence on unknown variable id " + std::to_string(u)});
      continue;
    }
    for (std::size_t s : states)
      if (s >= net.cardinality(u))
        report.violations.push_back({ViolationKind::UnknownState, {u, s},
                                     net.variable(u).name + " has no state index " + std::to_string(s)});
  }
  return report;
}

std::size_t cpd_row(const DiscreteNetwork& net, const Cpd& cpd, const Assignment& x) {
  std::size_t row = 0;
  for (VarId p : cpd.parents) row = row * net.cardinality(p) + x[p];
  return row;
}

double joint_probability(const DiscreteNetwork& net, const EvidenceSet& ev, const Assignment& x) {
  if (x.size() != net.size()) throw std::invalid_argument("assignment does not cover every variable");
  if (!ev.allows(x)) return 0.0;
  double p = 1.0;
  for (VarId u = 0; u < net.size(); ++u) {
    const Cpd& cpd = net.cpd(u);
    p *= cpd.table[cpd_row(net, cpd, x)][x[u]];
  }
  return p;
}

}  // namespace exactbp
