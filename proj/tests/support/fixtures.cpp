#include "fixtures.hpp"

#include <algorithm>
#include <numeric>

#include "exactbp/io.hpp"

namespace exactbp::testing {

std::string data_path(const std::string& name) { return std::string(EXACTBP_DATA_DIR) + "/" + name; }

const Pedigree& pedigree() {
  static const Pedigree ped = [] {
    Pedigree p;
    p.net = io::parse_network(io::read_file(data_path("pedigree.json")));
    p.evidence = io::parse_evidence(io::read_file(data_path("ped_ev.json")), p.net);
    p.jt = io::parse_junction_tree(io::read_file(data_path("pedigree_jt.json")), p.net);
    return p;
  }();
  return ped;
}

DiscreteNetwork random_network(std::mt19937_64& gen, const RandomNetworkOptions& opts) {
  std::uniform_int_distribution<std::size_t> nvars(opts.min_vars, opts.max_vars);
  std::uniform_int_distribution<std::size_t> nstates(1, opts.max_states);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = nvars(gen);

  std::vector<Variable> vars(n);
  for (std::size_t u = 0; u < n; ++u) {
    vars[u].name = "V" + std::to_string(u);
    const std::size_t d = nstates(gen);
    for (std::size_t s = 0; s < d; ++s) vars[u].states.push_back("s" + std::to_string(s));
  }

  std::vector<VarId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), gen);

  std::vector<Cpd> cpds;
  for (std::size_t a = 0; a < n; ++a) {
    Cpd cpd;
    cpd.child = order[a];
    for (std::size_t b = 0; b < a; ++b)
      if (cpd.parents.size() < opts.max_parents && unit(gen) < opts.edge_probability) cpd.parents.push_back(order[b]);
    std::shuffle(cpd.parents.begin(), cpd.parents.end(), gen);
    std::size_t rows = 1;
    for (VarId p : cpd.parents) rows *= vars[p].cardinality();
    const std::size_t d = vars[cpd.child].cardinality();
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<double> row(d);
      for (double& v : row) v = unit(gen) < opts.zero_probability ? 0.0 : 0.05 + unit(gen);
      if (std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; }))
        row[std::uniform_int_distribution<std::size_t>(0, d - 1)(gen)] = 1.0;
      const double total = std::accumulate(row.begin(), row.end(), 0.0);
      for (double& v : row) v /= total;
      cpd.table.push_back(std::move(row));
    }
    cpds.push_back(std::move(cpd));
  }
  std::shuffle(cpds.begin(), cpds.end(), gen);
  return DiscreteNetwork(std::move(vars), std::move(cpds));
}

EvidenceSet random_evidence(std::mt19937_64& gen, const DiscreteNetwork& net, double p) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  EvidenceSet ev;
  for (VarId u = 0; u < net.size(); ++u) {
    if (unit(gen) >= p) continue;
    const std::size_t d = net.cardinality(u);
    std::vector<std::size_t> states;
    for (std::size_t s = 0; s < d; ++s)
      if (unit(gen) < 0.5) states.push_back(s);
    if (states.empty()) states.push_back(std::uniform_int_distribution<std::size_t>(0, d - 1)(gen));
    ev.allow(u, std::move(states));
  }
  return ev;
}

DiscreteNetwork chain_ab() {
  return DiscreteNetwork({{"A", {"a0", "a1"}}, {"B", {"b0", "b1"}}},
                         {{0, {}, {{0.3, 0.7}}}, {1, {0}, {{0.9, 0.1}, {0.2, 0.8}}}});
}

}  // namespace exactbp::testing
