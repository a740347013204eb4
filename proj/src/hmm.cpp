#include "exactbp/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "exactbp/random.hpp"

namespace exactbp::hmm {

namespace {

// Divides the row by its maximum and returns log(max); -inf for an all-zero row.
double rescale_row(std::vector<double>& row) {
  const double top = *std::max_element(row.begin(), row.end());
  if (top == 0.0) return -std::numeric_limits<double>::infinity();
  for (double& v : row) v /= top;
  return std::log(top);
}

void require_horizon(const HmmSpec& spec, const std::vector<unsigned>& y) {
  spec.validate();
  if (y.size() != spec.horizon)
    throw std::invalid_argument("expected " + std::to_string(spec.horizon) + " observations, got " +
                                std::to_string(y.size()));
}

}  // namespace

void HmmSpec::validate() const {
  const std::size_t m = states.size();
  if (m == 0) throw std::invalid_argument("HMM needs at least one state");
  if (horizon < 1) throw std::invalid_argument("HMM horizon must be at least 1");
  if (initial.size() != m || transition.size() != m || rates.size() != m)
    throw std::invalid_argument("HMM parameter sizes disagree with the number of states");
  double mass = 0.0;
  for (double p : initial) {
    if (!(p >= 0.0)) throw std::invalid_argument("initial probabilities must be non-negative");
    mass += p;
  }
  if (std::abs(mass - 1.0) > 1e-12) throw std::invalid_argument("initial distribution must sum to 1");
  for (const auto& row : transition) {
    if (row.size() != m) throw std::invalid_argument("transition matrix must be square");
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) throw std::invalid_argument("transition probabilities must be non-negative");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("transition rows must sum to 1");
  }
  for (double r : rates)
    if (!(r > 0.0)) throw std::invalid_argument("Poisson rates must be positive");
}

HmmSpec precipitation_model(std::size_t days) {
  HmmSpec spec;
  spec.horizon = days;
  return spec;
}

double emission(const HmmSpec& spec, std::size_t s, unsigned k) {
  const double rate = spec.rates.at(s);
  return std::exp(-rate + k * std::log(rate) - std::lgamma(k + 1.0));
}

double ScaledTable::at(std::size_t i, std::size_t s) const {
  const double v = values.at(i).at(s);
  return v == 0.0 ? 0.0 : v * std::exp(log_scale.at(i));
}

double ScaledTable::log_at(std::size_t i, std::size_t s) const {
  const double v = values.at(i).at(s);
  return v == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(v) + log_scale.at(i);
}

ScaledTable forward(const HmmSpec& spec, const std::vector<unsigned>& y) {
  require_horizon(spec, y);
  const std::size_t n = y.size(), m = spec.num_states();
  ScaledTable f{std::vector<std::vector<double>>(n, std::vector<double>(m, 0.0)), std::vector<double>(n, 0.0)};
  if (n == 0) return f;
  for (std::size_t s = 0; s < m; ++s) f.values[0][s] = spec.initial[s] * emission(spec, s, y[0]);
  f.log_scale[0] = rescale_row(f.values[0]);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t s = 0; s < m; ++s) {
      double acc = 0.0;
      for (std::size_t r = 0; r < m; ++r) acc += f.values[i - 1][r] * spec.transition[r][s];
      f.values[i][s] = acc * emission(spec, s, y[i]);
    }
    f.log_scale[i] = f.log_scale[i - 1] + rescale_row(f.values[i]);
  }
  return f;
}

ScaledTable backward(const HmmSpec& spec, const std::vector<unsigned>& y) {
  require_horizon(spec, y);
  const std::size_t n = y.size(), m = spec.num_states();
  ScaledTable b{std::vector<std::vector<double>>(n, std::vector<double>(m, 1.0)), std::vector<double>(n, 0.0)};
  for (std::size_t i = n; i-- > 1;) {
    for (std::size_t r = 0; r < m; ++r) {
      double acc = 0.0;
      for (std::size_t s = 0; s < m; ++s) acc += spec.transition[r][s] * emission(spec, s, y[i]) * b.values[i][s];
      b.values[i - 1][r] = acc;
    }
    b.log_scale[i - 1] = b.log_scale[i] + rescale_row(b.values[i - 1]);
  }
  return b;
}

ForwardBackward forward_backward(const HmmSpec& spec, const std::vector<unsigned>& y) {
  return {forward(spec, y), backward(spec, y)};
}

double log_likelihood(const ForwardBackward& fb, std::size_t i) {
  double acc = 0.0;
  const auto& fv = fb.forward.values.at(i);
  const auto& bv = fb.backward.values.at(i);
  for (std::size_t s = 0; s < fv.size(); ++s) acc += fv[s] * bv[s];
  if (acc == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(acc) + fb.forward.log_scale[i] + fb.backward.log_scale[i];
}

std::vector<double> posterior(const ForwardBackward& fb, std::size_t i) {
  const auto& fv = fb.forward.values.at(i);
  const auto& bv = fb.backward.values.at(i);
  std::vector<double> p(fv.size());
  double total = 0.0;
  for (std::size_t s = 0; s < p.size(); ++s) total += p[s] = fv[s] * bv[s];
  if (total == 0.0) throw std::domain_error("observations have zero likelihood");
  for (double& v : p) v /= total;
  return p;
}

HmmNetwork to_bayes_net(const HmmSpec& spec, const std::vector<unsigned>& y, unsigned cutoff) {
  require_horizon(spec, y);
  const std::size_t n = y.size(), m = spec.num_states();

  std::vector<std::string> counts;
  for (unsigned k = 0; k <= cutoff; ++k) counts.push_back(std::to_string(k));
  std::vector<std::vector<double>> emission_rows(m);
  for (std::size_t s = 0; s < m; ++s)
    for (unsigned k = 0; k <= cutoff; ++k) emission_rows[s].push_back(emission(spec, s, k));

  HmmNetwork out;
  std::vector<Variable> vars;
  std::vector<Cpd> cpds;
  for (std::size_t i = 0; i < n; ++i) {
    const VarId s_id = vars.size();
    vars.push_back({"S" + std::to_string(i + 1), spec.states});
    if (i == 0)
      cpds.push_back({s_id, {}, {spec.initial}});
    else
      cpds.push_back({s_id, {out.hidden.back()}, spec.transition});
    out.hidden.push_back(s_id);

    const VarId y_id = vars.size();
    vars.push_back({"Y" + std::to_string(i + 1), counts});
    cpds.push_back({y_id, {s_id}, emission_rows});
    out.observed.push_back(y_id);
  }
  out.net = DiscreteNetwork(std::move(vars), std::move(cpds));
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] > cutoff)
      throw std::out_of_range("observation " + std::to_string(y[i]) + " exceeds the emission cutoff " +
                              std::to_string(cutoff));
    out.evidence.observe(out.observed[i], y[i]);
  }
  return out;
}

JunctionTree chain_junction_tree(const HmmNetwork& hnet) {
  JunctionTree jt;
  const std::size_t n = hnet.hidden.size();
  jt.assignment.assign(hnet.net.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<VarId> cluster{hnet.hidden[i], hnet.observed[i]};
    if (i > 0) {
      cluster.push_back(hnet.hidden[i - 1]);
      jt.edges.emplace_back(i - 1, i);
    }
    std::sort(cluster.begin(), cluster.end());
    jt.clusters.push_back(std::move(cluster));
    jt.assignment[hnet.hidden[i]] = i;
    jt.assignment[hnet.observed[i]] = i;
  }
  return jt;
}

Trajectory simulate(const HmmSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  Trajectory t;
  for (std::size_t i = 0; i < spec.horizon; ++i) {
    const std::size_t s = i == 0 ? rng.categorical(spec.initial) : rng.categorical(spec.transition[t.states.back()]);
    t.states.push_back(s);
    t.observations.push_back(rng.poisson(spec.rates[s]));
  }
  return t;
}

}  // namespace exactbp::hmm
