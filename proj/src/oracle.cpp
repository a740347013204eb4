#include "exactbp/oracle.hpp"

#include <algorithm>
#include <string>

namespace exactbp::oracle {

namespace {

using Domains = std::vector<std::vector<std::size_t>>;

// States each variable ranges over. Variables whose own indicator enters the
// summand only need their allowed states; the skipped terms are zero.
Domains domains_of(const DiscreteNetwork& net, const EvidenceSet& ev, const std::vector<VarId>& vars,
                   const std::vector<VarId>& indicated) {
  Domains d;
  for (VarId u : vars) {
    if (ev.constrains(u) && std::binary_search(indicated.begin(), indicated.end(), u)) {
      d.push_back(ev.entries().at(u));
    } else {
      d.emplace_back(net.cardinality(u));
      for (std::size_t s = 0; s < d.back().size(); ++s) d.back()[s] = s;
    }
  }
  return d;
}

void guard(const std::vector<VarId>& vars, const Domains& domains) {
  std::size_t n = 1;
  for (const auto& states : domains) {
    const std::size_t c = states.size();
    if (c != 0 && n > kMaxJointEntries / c)
      throw OracleSizeError("enumeration over " + std::to_string(vars.size()) + " variables exceeds the size guard");
    n *= c;
  }
}

// Calls visit(x) for every assignment of `vars` over their domains (others held at 0),
// last variable fastest, states ascending.
template <typename Visit>
void enumerate(const DiscreteNetwork& net, const std::vector<VarId>& vars, const Domains& domains, Visit visit) {
  Assignment x(net.size(), 0);
  std::vector<std::size_t> pos(vars.size(), 0);
  for (std::size_t k = 0; k < vars.size(); ++k) {
    if (domains[k].empty()) return;
    x[vars[k]] = domains[k][0];
  }
  while (true) {
    visit(x);
    std::size_t k = vars.size();
    while (k > 0) {
      --k;
      if (++pos[k] < domains[k].size()) {
        x[vars[k]] = domains[k][pos[k]];
        break;
      }
      pos[k] = 0;
      x[vars[k]] = domains[k][0];
      if (k == 0) return;
    }
    if (vars.empty()) return;
  }
}

double potential(const DiscreteNetwork& net, const EvidenceSet& ev, VarId u, const Assignment& x) {
  if (!ev.allows(u, x[u])) return 0.0;
  const Cpd& cpd = net.cpd(u);
  return cpd.table[cpd_row(net, cpd, x)][x[u]];
}

std::vector<VarId> all_variables(const DiscreteNetwork& net) {
  std::vector<VarId> all(net.size());
  for (VarId u = 0; u < net.size(); ++u) all[u] = u;
  return all;
}

std::size_t flat_index(const DiscreteNetwork& net, const std::vector<VarId>& vars, const Assignment& x) {
  std::size_t idx = 0;
  for (VarId u : vars) idx = idx * net.cardinality(u) + x[u];
  return idx;
}

}  // namespace

Factor joint_table(const DiscreteNetwork& net, const EvidenceSet& ev) {
  const auto all = all_variables(net);
  const auto domains = domains_of(net, EvidenceSet{}, all, all);
  guard(all, domains);
  std::vector<double> values;
  enumerate(net, all, domains, [&](const Assignment& x) { values.push_back(joint_probability(net, ev, x)); });
  return Factor(all, net.cardinalities(all), std::move(values));
}

double evidence_probability(const DiscreteNetwork& net, const EvidenceSet& ev) {
  const auto all = all_variables(net);
  const auto domains = domains_of(net, ev, all, all);
  guard(all, domains);
  double total = 0.0;
  enumerate(net, all, domains, [&](const Assignment& x) { total += joint_probability(net, ev, x); });
  return total;
}

Factor marginal(const DiscreteNetwork& net, const EvidenceSet& ev, std::vector<VarId> vars) {
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  const auto all = all_variables(net);
  const auto domains = domains_of(net, ev, all, all);
  guard(all, domains);
  const auto cards = net.cardinalities(vars);
  std::size_t n = 1;
  for (std::size_t c : cards) n *= c;
  std::vector<double> values(n, 0.0);
  enumerate(net, all, domains, [&](const Assignment& x) { values[flat_index(net, vars, x)] += joint_probability(net, ev, x); });
  return Factor(std::move(vars), cards, std::move(values));
}

Factor message(const DiscreteNetwork& net, const EvidenceSet& ev, const JunctionTree& jt, ClusterId from,
               ClusterId to) {
  const EdgeContext ctx = edge_context(jt, from, to);
  std::vector<VarId> vars = ctx.upstream;
  vars.insert(vars.end(), ctx.separator.begin(), ctx.separator.end());
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  const auto domains = domains_of(net, ev, vars, ctx.upstream);
  guard(vars, domains);

  const auto cards = net.cardinalities(ctx.separator);
  std::size_t n = 1;
  for (std::size_t c : cards) n *= c;
  std::vector<double> values(n, 0.0);
  enumerate(net, vars, domains, [&](const Assignment& x) {
    double p = 1.0;
    for (VarId u : ctx.upstream) p *= potential(net, ev, u, x);
    values[flat_index(net, ctx.separator, x)] += p;
  });
  return Factor(ctx.separator, cards, std::move(values));
}

std::optional<MapAnswer> map(const DiscreteNetwork& net, const EvidenceSet& ev) {
  const auto all = all_variables(net);
  const auto domains = domains_of(net, ev, all, all);
  guard(all, domains);
  MapAnswer best;
  enumerate(net, all, domains, [&](const Assignment& x) {
    const double p = joint_probability(net, ev, x);
    if (p > best.value) best = {x, p};
  });
  if (best.value == 0.0) return std::nullopt;
  return best;
}

}  // namespace exactbp::oracle
