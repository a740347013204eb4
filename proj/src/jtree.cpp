#include "exactbp/jtree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>
#include <string>
#include <tuple>

namespace exactbp {

namespace {

std::vector<VarId> sorted_copy(std::vector<VarId> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<VarId> intersect(const std::vector<VarId>& a, const std::vector<VarId>& b) {
  std::vector<VarId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool is_subset(const std::vector<VarId>& small, const std::vector<VarId>& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

std::string names_of(const DiscreteNetwork& net, const std::vector<VarId>& ids) {
  std::string out;
  for (VarId u : ids) {
    if (!out.empty()) out += ' ';
    out += u < net.size() ? net.variable(u).name : "#" + std::to_string(u);
  }
  return out;
}

std::string cluster_label(ClusterId i) { return "C" + std::to_string(i); }

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

std::vector<std::vector<VarId>> elimination_cliques(const DiscreteNetwork& net) {
  const std::size_t p = net.size();
  std::vector<std::set<VarId>> adj(p);
  auto link = [&adj](VarId a, VarId b) {
    if (a == b) return;
    adj[a].insert(b);
    adj[b].insert(a);
  };
  for (VarId u = 0; u < p; ++u) {
    const auto& parents = net.cpd(u).parents;
    for (std::size_t a = 0; a < parents.size(); ++a) {
      link(parents[a], u);
      for (std::size_t b = a + 1; b < parents.size(); ++b) link(parents[a], parents[b]);
    }
  }

  std::vector<bool> eliminated(p, false);
  std::vector<std::vector<VarId>> cliques;
  for (std::size_t step = 0; step < p; ++step) {
    VarId best = p;
    std::size_t best_fill = 0;
    for (VarId v = 0; v < p; ++v) {
      if (eliminated[v]) continue;
      std::size_t fill = 0;
      for (auto a = adj[v].begin(); a != adj[v].end(); ++a)
        for (auto b = std::next(a); b != adj[v].end(); ++b)
          if (!adj[*a].contains(*b)) ++fill;
      if (best == p || fill < best_fill) {
        best = v;
        best_fill = fill;
      }
    }
    std::vector<VarId> clique(adj[best].begin(), adj[best].end());
    clique.push_back(best);
    cliques.push_back(sorted_copy(std::move(clique)));
    for (auto a = adj[best].begin(); a != adj[best].end(); ++a)
      for (auto b = std::next(a); b != adj[best].end(); ++b) link(*a, *b);
    for (VarId n : adj[best]) adj[n].erase(best);
    adj[best].clear();
    eliminated[best] = true;
  }

  std::vector<std::vector<VarId>> maximal;
  for (std::size_t k = 0; k < cliques.size(); ++k) {
    bool dominated = false;
    for (std::size_t l = 0; l < cliques.size() && !dominated; ++l) {
      if (l == k || !is_subset(cliques[k], cliques[l])) continue;
      dominated = cliques[k].size() < cliques[l].size() || l < k;
    }
    if (!dominated) maximal.push_back(cliques[k]);
  }
  return maximal;
}

}  // namespace

std::vector<std::vector<ClusterId>> JunctionTree::neighbors() const {
  std::vector<std::vector<ClusterId>> nb(clusters.size());
  for (const auto& [a, b] : edges) {
    if (a >= clusters.size() || b >= clusters.size()) continue;
    nb[a].push_back(b);
    nb[b].push_back(a);
  }
  for (auto& list : nb) std::sort(list.begin(), list.end());
  return nb;
}

bool JunctionTree::has_edge(ClusterId i, ClusterId j) const {
  return std::any_of(edges.begin(), edges.end(), [i, j](const Edge& e) {
    return (e.first == i && e.second == j) || (e.first == j && e.second == i);
  });
}

std::vector<VarId> JunctionTree::separator(ClusterId i, ClusterId j) const {
  return intersect(sorted_copy(clusters.at(i)), sorted_copy(clusters.at(j)));
}

std::vector<VarId> JunctionTree::owned(ClusterId j) const {
  std::vector<VarId> out;
  for (VarId u = 0; u < assignment.size(); ++u)
    if (assignment[u] == j) out.push_back(u);
  return out;
}

std::size_t JunctionTree::max_cluster_size() const {
  std::size_t m = 0;
  for (const auto& c : clusters) m = std::max(m, c.size());
  return m;
}

JunctionTree build_junction_tree(const DiscreteNetwork& net) {
  JunctionTree jt;
  jt.clusters = elimination_cliques(net);
  if (jt.clusters.empty()) jt.clusters.emplace_back();

  const std::size_t q = jt.clusters.size();
  std::vector<std::tuple<std::size_t, ClusterId, ClusterId>> candidates;
  for (ClusterId i = 0; i < q; ++i)
    for (ClusterId j = i + 1; j < q; ++j)
      candidates.emplace_back(intersect(jt.clusters[i], jt.clusters[j]).size(), i, j);
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
  DisjointSets components(q);
  for (const auto& [weight, i, j] : candidates)
    if (components.unite(i, j)) jt.edges.emplace_back(i, j);

  jt.assignment = assign_clusters(net, jt);
  return jt;
}

std::vector<ClusterId> assign_clusters(const DiscreteNetwork& net, const JunctionTree& jt) {
  std::vector<std::vector<VarId>> sorted;
  for (const auto& c : jt.clusters) sorted.push_back(sorted_copy(c));
  std::vector<ClusterId> cl(net.size());
  for (VarId u = 0; u < net.size(); ++u) {
    const auto fa = family(net, u);
    std::optional<ClusterId> best;
    for (ClusterId i = 0; i < sorted.size(); ++i)
      if (is_subset(fa, sorted[i]) && (!best || sorted[i].size() < sorted[*best].size())) best = i;
    if (!best) throw CoveringError("no cluster contains the family of " + net.variable(u).name);
    cl[u] = *best;
  }
  return cl;
}

std::vector<ClusterId> tree_path(const JunctionTree& jt, ClusterId i, ClusterId j) {
  const auto nb = jt.neighbors();
  std::vector<std::optional<ClusterId>> prev(jt.size());
  std::vector<bool> seen(jt.size(), false);
  std::queue<ClusterId> frontier;
  frontier.push(i);
  seen[i] = true;
  while (!frontier.empty()) {
    ClusterId k = frontier.front();
    frontier.pop();
    if (k == j) break;
    for (ClusterId n : nb[k])
      if (!seen[n]) {
        seen[n] = true;
        prev[n] = k;
        frontier.push(n);
      }
  }
  if (!seen[j]) return {};
  std::vector<ClusterId> path{j};
  while (path.back() != i) path.push_back(*prev[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

ValidationReport validate_junction_tree(const DiscreteNetwork& net, const JunctionTree& jt) {
  ValidationReport report;
  const std::size_t q = jt.size();
  std::vector<std::vector<VarId>> clusters;
  for (ClusterId i = 0; i < q; ++i) {
    clusters.push_back(sorted_copy(jt.clusters[i]));
    for (VarId u : clusters.back())
      if (u >= net.size())
        report.violations.push_back({ViolationKind::UnknownVariable, {i, u},
                                     cluster_label(i) + " references unknown variable id " + std::to_string(u)});
  }

  // JT1
  bool tree_ok = q > 0;
  if (q == 0) report.violations.push_back({ViolationKind::Tree, {}, "no clusters"});
  std::set<Edge> seen_edges;
  for (const auto& [a, b] : jt.edges) {
    if (a >= q || b >= q || a == b) {
      report.violations.push_back({ViolationKind::Tree, {a, b},
                                   "invalid edge " + std::to_string(a) + "-" + std::to_string(b)});
      tree_ok = false;
    } else if (!seen_edges.insert({std::min(a, b), std::max(a, b)}).second) {
      report.violations.push_back({ViolationKind::Tree, {a, b},
                                   "duplicate edge " + cluster_label(a) + "-" + cluster_label(b)});
      tree_ok = false;
    }
  }
  if (tree_ok) {
    DisjointSets components(q);
    for (const auto& [a, b] : jt.edges)
      if (!components.unite(a, b)) {
        report.violations.push_back({ViolationKind::Tree, {a, b},
                                     "edge " + cluster_label(a) + "-" + cluster_label(b) + " closes a cycle"});
        tree_ok = false;
      }
    for (ClusterId i = 1; i < q; ++i)
      if (components.find(i) != components.find(0)) {
        report.violations.push_back({ViolationKind::Tree, {0, i},
                                     cluster_label(i) + " is not connected to " + cluster_label(0)});
        tree_ok = false;
      }
  }

  // JT2: only meaningful when paths are unique.
  if (tree_ok) {
    for (ClusterId i = 0; i < q; ++i)
      for (ClusterId j = i + 1; j < q; ++j) {
        const auto common = intersect(clusters[i], clusters[j]);
        if (common.empty()) continue;
        const auto path = tree_path(jt, i, j);
        for (std::size_t s = 1; s + 1 < path.size(); ++s) {
          const ClusterId k = path[s];
          std::vector<VarId> missing;
          std::set_difference(common.begin(), common.end(), clusters[k].begin(), clusters[k].end(),
                              std::back_inserter(missing));
          if (!missing.empty())
            report.violations.push_back({ViolationKind::RunningIntersection, {i, j, k},
                                         cluster_label(i) + " ∩ " + cluster_label(j) + " not contained in " +
                                             cluster_label(k) + " (missing " + names_of(net, missing) + ")"});
        }
      }
  }

  // JT3 and the assignment.
  for (VarId u = 0; u < net.size(); ++u) {
    const auto fa = family(net, u);
    const bool covered =
        std::any_of(clusters.begin(), clusters.end(), [&fa](const auto& c) { return is_subset(fa, c); });
    if (!covered)
      report.violations.push_back({ViolationKind::Covering, {u},
                                   "no cluster contains fa(" + net.variable(u).name + ") = {" + names_of(net, fa) +
                                       "}"});
  }
  // An empty assignment has not been made yet and is not checked.
  if (jt.assignment.empty()) return report;
  if (jt.assignment.size() != net.size()) {
    report.violations.push_back({ViolationKind::Assignment, {},
                                 "assignment covers " + std::to_string(jt.assignment.size()) + " of " +
                                     std::to_string(net.size()) + " variables"});
  } else {
    for (VarId u = 0; u < net.size(); ++u) {
      const ClusterId c = jt.assignment[u];
      if (c >= q || !is_subset(family(net, u), clusters[c]))
        report.violations.push_back({ViolationKind::Assignment, {u, c},
                                     net.variable(u).name + " assigned to " + cluster_label(c) +
                                         ", which does not contain its family"});
    }
  }
  return report;
}

std::vector<ClusterId> subtree_clusters(const JunctionTree& jt, ClusterId from, ClusterId to) {
  const auto nb = jt.neighbors();
  std::vector<bool> seen(jt.size(), false);
  seen[from] = true;
  seen[to] = true;
  std::vector<ClusterId> stack{from}, out;
  while (!stack.empty()) {
    ClusterId k = stack.back();
    stack.pop_back();
    out.push_back(k);
    for (ClusterId n : nb[k])
      if (!seen[n]) {
        seen[n] = true;
        stack.push_back(n);
      }
  }
  std::sort(out.begin(), out.end());
  return out;
}

EdgeContext edge_context(const JunctionTree& jt, ClusterId from, ClusterId to) {
  if (from >= jt.size() || to >= jt.size() || !jt.has_edge(from, to))
    throw std::invalid_argument(cluster_label(from) + "-" + cluster_label(to) + " is not a tree edge");
  EdgeContext ctx;
  ctx.separator = jt.separator(from, to);
  const auto side = subtree_clusters(jt, from, to);
  for (VarId u = 0; u < jt.assignment.size(); ++u)
    if (std::binary_search(side.begin(), side.end(), jt.assignment[u])) ctx.upstream.push_back(u);
  ctx.local = intersect(ctx.upstream, ctx.separator);
  std::set_difference(ctx.upstream.begin(), ctx.upstream.end(), ctx.separator.begin(), ctx.separator.end(),
                      std::back_inserter(ctx.summed));
  return ctx;
}

RootedTree root_tree(const JunctionTree& jt, ClusterId root) {
  if (root >= jt.size()) throw std::out_of_range("root " + std::to_string(root) + " is not a cluster");
  const auto nb = jt.neighbors();
  RootedTree rt;
  rt.root = root;
  rt.parent.assign(jt.size(), std::nullopt);
  rt.children.assign(jt.size(), {});
  std::vector<bool> seen(jt.size(), false);
  std::queue<ClusterId> frontier;
  frontier.push(root);
  seen[root] = true;
  while (!frontier.empty()) {
    ClusterId k = frontier.front();
    frontier.pop();
    rt.bfs_order.push_back(k);
    for (ClusterId n : nb[k])
      if (!seen[n]) {
        seen[n] = true;
        rt.parent[n] = k;
        rt.children[k].push_back(n);
        frontier.push(n);
      }
  }
  return rt;
}

}  // namespace exactbp
