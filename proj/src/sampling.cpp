#include "exactbp/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace exactbp {

namespace {

constexpr double kConditionalMassTolerance = 1e-9;

Factor numerator(const CompiledQuery& cq, ClusterId j, std::optional<ClusterId> parent) {
  const auto& members = cq.junction_tree().clusters[j];
  const auto& net = cq.network();
  Factor acc = multiply(Factor::ones(members, net.cardinalities(members)), cq.cluster_potential(j),
                        cq.options().scope_cap);
  for (ClusterId i : cq.neighbors()[j]) {
    if (parent && i == *parent) continue;
    acc = multiply(acc, cq.messages().get(Semiring::SumProduct, i, j), cq.options().scope_cap);
  }
  return acc;
}

std::vector<std::size_t> decode(std::size_t k, const std::vector<std::size_t>& cards) {
  std::vector<std::size_t> states(cards.size());
  for (std::size_t d = cards.size(); d-- > 0;) {
    states[d] = k % cards[d];
    k /= cards[d];
  }
  return states;
}

std::size_t table_size(const std::vector<std::size_t>& cards) {
  std::size_t n = 1;
  for (std::size_t c : cards) n *= c;
  return n;
}

}  // namespace

Factor cluster_conditional(const CompiledQuery& cq, ClusterId j, std::optional<ClusterId> parent,
                           std::span<const std::size_t> sep_states) {
  const JunctionTree& jt = cq.junction_tree();
  if (j >= jt.size()) throw std::out_of_range("cluster index out of range");
  std::vector<VarId> sep;
  Factor denominator;
  const Factor num = numerator(cq, j, parent);
  if (parent) {
    if (!jt.has_edge(j, *parent)) throw std::invalid_argument("sampling parent is not a neighbour");
    sep = jt.separator(j, *parent);
    const Factor& message = cq.messages().get(Semiring::SumProduct, j, *parent);
    const double value = message.value(sep_states);
    if (value == 0.0) throw SamplingConsistencyError("separator assignment has zero probability");
    denominator = Factor::constant(value, message.log_scale());
  } else {
    if (!sep_states.empty()) throw std::invalid_argument("the root cluster has no separator");
    const double log_z = num.log_mass();
    if (log_z == -std::numeric_limits<double>::infinity())
      throw ImpossibleEvidenceError("evidence has probability zero");
    denominator = Factor::constant(1.0, log_z);
  }
  Factor conditional = divide(slice(num, sep, sep_states), denominator).flattened();
  if (std::abs(conditional.mass() - 1.0) > kConditionalMassTolerance)
    throw SamplingConsistencyError("conditional of cluster C" + std::to_string(j) + " sums to " +
                                   std::to_string(conditional.mass()));
  return conditional;
}

PosteriorSampler::PosteriorSampler(const CompiledQuery& cq, ClusterId root, std::uint64_t seed)
    : cq_(cq), tree_(root_tree(cq.junction_tree(), root)), rng_(seed) {
  const JunctionTree& jt = cq.junction_tree();
  std::vector<ClusterId> stack{root};
  while (!stack.empty()) {
    ClusterId k = stack.back();
    stack.pop_back();
    preorder_.push_back(k);
    const auto& kids = tree_.children[k];
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }

  tables_.resize(jt.size());
  for (ClusterId j : preorder_) {
    ClusterTable& t = tables_[j];
    const auto parent = tree_.parent[j];
    if (parent) t.separator = jt.separator(j, *parent);
    std::set_difference(jt.clusters[j].begin(), jt.clusters[j].end(), t.separator.begin(), t.separator.end(),
                        std::back_inserter(t.free));
    t.separator_cards = cq.network().cardinalities(t.separator);
    t.free_cards = cq.network().cardinalities(t.free);
    const std::size_t rows = table_size(t.separator_cards);
    t.rows.resize(rows);
    const Factor* down = parent ? &cq.messages().get(Semiring::SumProduct, j, *parent) : nullptr;
    for (std::size_t k = 0; k < rows; ++k) {
      if (down && down->values()[k] == 0.0) continue;
      t.rows[k] = cluster_conditional(cq, j, parent, decode(k, t.separator_cards)).values();
    }
  }
}

void PosteriorSampler::sample_cluster(ClusterId j, std::vector<std::optional<std::size_t>>& x) {
  const ClusterTable& t = tables_[j];
  std::size_t row = 0;
  for (std::size_t d = 0; d < t.separator.size(); ++d) row = row * t.separator_cards[d] + x[t.separator[d]].value();
  if (t.rows[row].empty())
    throw SamplingConsistencyError("reached a zero-probability separator assignment in cluster C" +
                                   std::to_string(j));
  const auto states = decode(rng_.categorical(t.rows[row]), t.free_cards);
  for (std::size_t d = 0; d < t.free.size(); ++d) x[t.free[d]] = states[d];
}

Assignment PosteriorSampler::draw() {
  std::vector<std::optional<std::size_t>> x(cq_.network().size());
  for (ClusterId j : preorder_) sample_cluster(j, x);
  Assignment out(x.size());
  for (std::size_t u = 0; u < x.size(); ++u) out[u] = x[u].value();
  return out;
}

std::vector<Assignment> PosteriorSampler::draw(std::size_t count) {
  std::vector<Assignment> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(draw());
  return out;
}

std::vector<std::optional<std::size_t>> PosteriorSampler::draw_subset(std::span<const VarId> targets) {
  const JunctionTree& jt = cq_.junction_tree();
  std::vector<std::size_t> depth(jt.size(), 0);
  for (ClusterId k : tree_.bfs_order)
    if (tree_.parent[k]) depth[k] = depth[*tree_.parent[k]] + 1;

  std::vector<bool> needed(jt.size(), false);
  for (VarId u : targets) {
    std::optional<ClusterId> best;
    for (ClusterId k = 0; k < jt.size(); ++k)
      if (std::binary_search(jt.clusters[k].begin(), jt.clusters[k].end(), u) && (!best || depth[k] < depth[*best]))
        best = k;
    if (!best) throw std::out_of_range("variable " + std::to_string(u) + " is in no cluster");
    for (std::optional<ClusterId> k = best; k && !needed[*k]; k = tree_.parent[*k]) needed[*k] = true;
  }

  std::vector<std::optional<std::size_t>> x(cq_.network().size());
  for (ClusterId j : preorder_)
    if (needed[j]) sample_cluster(j, x);
  std::vector<std::optional<std::size_t>> out(x.size());
  for (VarId u : targets) out[u] = x[u];
  return out;
}

std::vector<Assignment> sample_posterior(const CompiledQuery& cq, ClusterId root, std::uint64_t seed,
                                         std::size_t count) {
  PosteriorSampler sampler(cq, root, seed);
  return sampler.draw(count);
}

std::vector<double> hmm_forward_transition(const hmm::HmmSpec& spec, const std::vector<unsigned>& y,
                                           const hmm::ForwardBackward& fb, std::size_t i, std::size_t r) {
  const auto& b = fb.backward;
  const double from = b.values.at(i - 1).at(r);
  if (from == 0.0) throw std::domain_error("conditioning on a zero-probability state");
  const double shift = std::exp(b.log_scale[i] - b.log_scale[i - 1]);
  std::vector<double> p(spec.num_states());
  for (std::size_t s = 0; s < p.size(); ++s)
    p[s] = spec.transition[r][s] * hmm::emission(spec, s, y[i]) * b.values[i][s] / from * shift;
  return p;
}

std::vector<double> hmm_backward_transition(const hmm::HmmSpec& spec, const std::vector<unsigned>& y,
                                            const hmm::ForwardBackward& fb, std::size_t i, std::size_t s) {
  const auto& f = fb.forward;
  const double to = f.values.at(i).at(s);
  if (to == 0.0) throw std::domain_error("conditioning on a zero-probability state");
  const double shift = std::exp(f.log_scale[i - 1] - f.log_scale[i]);
  const double emit = hmm::emission(spec, s, y[i]);
  std::vector<double> p(spec.num_states());
  for (std::size_t r = 0; r < p.size(); ++r) p[r] = f.values[i - 1][r] * spec.transition[r][s] * emit / to * shift;
  return p;
}

std::vector<std::size_t> sample_hmm_path(const hmm::HmmSpec& spec, const std::vector<unsigned>& y,
                                         const hmm::ForwardBackward& fb, PathDirection direction, Rng& rng) {
  const std::size_t n = y.size();
  std::vector<std::size_t> path(n);
  if (n == 0) return path;
  if (direction == PathDirection::Forward) {
    path[0] = rng.categorical(hmm::posterior(fb, 0));
    for (std::size_t i = 1; i < n; ++i) path[i] = rng.categorical(hmm_forward_transition(spec, y, fb, i, path[i - 1]));
  } else {
    path[n - 1] = rng.categorical(hmm::posterior(fb, n - 1));
    for (std::size_t i = n - 1; i > 0; --i) path[i - 1] = rng.categorical(hmm_backward_transition(spec, y, fb, i, path[i]));
  }
  return path;
}

std::vector<std::size_t> sample_hmm_path(const hmm::HmmSpec& spec, const std::vector<unsigned>& y,
                                         PathDirection direction, std::uint64_t seed) {
  Rng rng(seed);
  return sample_hmm_path(spec, y, hmm::forward_backward(spec, y), direction, rng);
}

}  // namespace exactbp
