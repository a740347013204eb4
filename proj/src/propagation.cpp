#include "exactbp/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace exactbp {

namespace {

std::string edge_label(ClusterId from, ClusterId to) {
  return "C" + std::to_string(from) + "->C" + std::to_string(to);
}

Factor reduce(const Factor& f, std::span<const VarId> drop, Semiring s) {
  return s == Semiring::SumProduct ? marginalize_sum(f, drop) : marginalize_max(f, drop);
}

std::size_t argmax(const std::vector<double>& values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace

bool MessageStore::has(Semiring s, ClusterId from, ClusterId to) const {
  return messages_.contains({s, from, to});
}

const Factor& MessageStore::get(Semiring s, ClusterId from, ClusterId to) const {
  auto it = messages_.find({s, from, to});
  if (it == messages_.end())
    throw SchedulingError(std::string(s == Semiring::SumProduct ? "sum" : "max") + " message " +
                          edge_label(from, to) + " has not been computed");
  return it->second;
}

void MessageStore::put(Semiring s, ClusterId from, ClusterId to, Factor message) {
  messages_.insert_or_assign({s, from, to}, std::move(message));
}

std::size_t MessageStore::count(Semiring s) const {
  return static_cast<std::size_t>(
      std::count_if(messages_.begin(), messages_.end(), [s](const auto& kv) { return std::get<0>(kv.first) == s; }));
}

std::vector<Factor> build_potentials(const DiscreteNetwork& net, const EvidenceSet& ev) {
  std::vector<Factor> k;
  k.reserve(net.size());
  for (VarId u = 0; u < net.size(); ++u) {
    // Only the indicator of u itself enters K_u; parents keep their full domain.
    EvidenceSet own;
    if (ev.constrains(u)) own.allow(u, ev.entries().at(u));
    k.push_back(restrict(cpd_factor(net, u), own));
  }
  return k;
}

CompiledQuery::CompiledQuery(DiscreteNetwork net, EvidenceSet ev, JunctionTree jt, PropagationOptions options)
    : net_(std::move(net)), ev_(std::move(ev)), jt_(std::move(jt)), options_(options) {
  if (auto report = validate_network(net_); !report.ok()) throw InvalidModelError("invalid network", report);
  if (auto report = validate_evidence(net_, ev_); !report.ok()) throw InvalidModelError("invalid evidence", report);
  for (auto& c : jt_.clusters) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }
  if (jt_.assignment.empty()) {
    try {
      jt_.assignment = assign_clusters(net_, jt_);
    } catch (const CoveringError&) {
      // left empty; the validator reports the covering failure
    }
  }
  if (auto report = validate_junction_tree(net_, jt_); !report.ok())
    throw InvalidModelError("invalid junction tree", report);
  if (options_.root >= jt_.size()) throw std::out_of_range("root cluster out of range");

  neighbors_ = jt_.neighbors();
  potentials_ = build_potentials(net_, ev_);
  cluster_potentials_.assign(jt_.size(), Factor());
  for (VarId u = 0; u < net_.size(); ++u) {
    Factor& phi = cluster_potentials_[jt_.assignment[u]];
    phi = multiply(phi, potentials_[u], options_.scope_cap);
  }
}

Factor CompiledQuery::incoming_product(ClusterId j, Semiring s, std::optional<ClusterId> except) const {
  const auto& members = jt_.clusters[j];
  Factor acc = multiply(Factor::ones(members, net_.cardinalities(members)), cluster_potentials_[j], options_.scope_cap);
  for (ClusterId i : neighbors_[j]) {
    if (except && i == *except) continue;
    acc = multiply(acc, store_.get(s, i, j), options_.scope_cap);
  }
  return acc;
}

void CompiledQuery::compute_message(ClusterId from, ClusterId to, Semiring s) {
  if (from >= jt_.size() || to >= jt_.size() || !jt_.has_edge(from, to))
    throw std::invalid_argument(edge_label(from, to) + " is not a tree edge");
  const Factor product = incoming_product(from, s, to);
  const auto sep = jt_.separator(from, to);
  std::vector<VarId> drop;
  std::set_difference(jt_.clusters[from].begin(), jt_.clusters[from].end(), sep.begin(), sep.end(),
                      std::back_inserter(drop));
  Factor message = reduce(product, drop, s);
  if (options_.renormalize) message = message.rescaled();
  store_.put(s, from, to, std::move(message));
}

std::vector<Edge> CompiledQuery::inward_schedule(ClusterId root) const {
  const RootedTree rt = root_tree(jt_, root);
  std::vector<Edge> schedule;
  for (auto it = rt.bfs_order.rbegin(); it != rt.bfs_order.rend(); ++it)
    if (rt.parent[*it]) schedule.emplace_back(*it, *rt.parent[*it]);
  return schedule;
}

std::vector<Edge> CompiledQuery::outward_schedule(ClusterId root) const {
  const RootedTree rt = root_tree(jt_, root);
  std::vector<Edge> schedule;
  for (ClusterId k : rt.bfs_order)
    for (ClusterId c : rt.children[k]) schedule.emplace_back(k, c);
  return schedule;
}

void CompiledQuery::inward(ClusterId root, Semiring s) {
  for (const auto& [from, to] : inward_schedule(root)) compute_message(from, to, s);
  (s == Semiring::SumProduct ? sum_root_ : max_root_) = root;
}

void CompiledQuery::outward(ClusterId root, Semiring s) {
  for (const auto& [from, to] : outward_schedule(root)) compute_message(from, to, s);
}

void CompiledQuery::calibrate() {
  inward(options_.root);
  outward(options_.root);
}

void CompiledQuery::max_messages(ClusterId root) {
  inward(root, Semiring::MaxProduct);
  outward(root, Semiring::MaxProduct);
}

Factor CompiledQuery::edge_marginal(ClusterId i, ClusterId j, Semiring s) const {
  if (i >= jt_.size() || j >= jt_.size() || !jt_.has_edge(i, j))
    throw std::invalid_argument(edge_label(i, j) + " is not a tree edge");
  return multiply(store_.get(s, i, j), store_.get(s, j, i), options_.scope_cap);
}

Factor CompiledQuery::cluster_marginal(ClusterId j, Semiring s) const {
  return incoming_product(j, s, std::nullopt);
}

double CompiledQuery::log_evidence_probability() const {
  if (!sum_root_) throw SchedulingError("log_evidence_probability requires an inward pass");
  return log_evidence_probability_at(*sum_root_);
}

double CompiledQuery::log_evidence_probability_at(ClusterId j) const { return cluster_marginal(j).log_mass(); }

std::vector<double> CompiledQuery::variable_posterior(VarId u) const {
  if (u >= net_.size()) throw std::out_of_range("unknown variable id " + std::to_string(u));
  const Factor joint = cluster_marginal(jt_.assignment[u]);
  std::vector<VarId> drop;
  for (VarId v : joint.scope())
    if (v != u) drop.push_back(v);
  const Factor marginal = marginalize_sum(joint, drop);
  if (marginal.mass() == 0.0) throw ImpossibleEvidenceError("evidence has probability zero");
  return normalize(marginal).factor.values();
}

MapResult CompiledQuery::map_assignment() const {
  if (!max_root_) throw SchedulingError("map_assignment requires max_messages()");
  const RootedTree rt = root_tree(jt_, *max_root_);

  const Factor root_table = cluster_marginal(rt.root, Semiring::MaxProduct);
  const std::size_t best = argmax(root_table.values());
  const double top = root_table.values()[best];
  if (top == 0.0) throw ImpossibleEvidenceError("evidence has probability zero");

  MapResult result;
  result.assignment.assign(net_.size(), 0);
  result.log_value = std::log(top) + root_table.log_scale();
  const auto root_states = root_table.states_of(best);
  for (std::size_t d = 0; d < root_table.scope().size(); ++d) result.assignment[root_table.scope()[d]] = root_states[d];

  for (ClusterId k : rt.bfs_order) {
    if (!rt.parent[k]) continue;
    const auto sep = jt_.separator(k, *rt.parent[k]);
    std::vector<std::size_t> sep_states;
    for (VarId v : sep) sep_states.push_back(result.assignment[v]);
    const Factor local = slice(incoming_product(k, Semiring::MaxProduct, rt.parent[k]), sep, sep_states);
    const auto states = local.states_of(argmax(local.values()));
    for (std::size_t d = 0; d < local.scope().size(); ++d) result.assignment[local.scope()[d]] = states[d];
  }
  return result;
}

CompiledQuery calibrated_query(const DiscreteNetwork& net, const EvidenceSet& ev, std::optional<JunctionTree> jt,
                               PropagationOptions options) {
  if (!jt) {
    if (auto report = validate_network(net); !report.ok()) throw InvalidModelError("invalid network", report);
    jt = build_junction_tree(net);
  }
  CompiledQuery cq(net, ev, std::move(*jt), options);
  cq.calibrate();
  return cq;
}

}  // namespace exactbp
