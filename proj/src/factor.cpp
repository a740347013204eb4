#include "exactbp/factor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace exactbp {

namespace {

std::size_t table_size(const std::vector<std::size_t>& cards) {
  std::size_t n = 1;
  for (std::size_t c : cards) n *= c;
  return n;
}

// Row-major strides: last variable has stride 1.
std::vector<std::size_t> own_strides(const std::vector<std::size_t>& cards) {
  std::vector<std::size_t> strides(cards.size(), 1);
  for (std::size_t k = cards.size(); k-- > 1;) strides[k - 1] = strides[k] * cards[k];
  return strides;
}

// For each variable of `walk`, the stride of that variable in `target` (0 when absent).
std::vector<std::size_t> strides_in(const std::vector<VarId>& walk, const Factor& target) {
  const auto target_strides = own_strides(target.cardinalities());
  std::vector<std::size_t> out(walk.size(), 0);
  for (std::size_t k = 0; k < walk.size(); ++k) {
    auto it = std::lower_bound(target.scope().begin(), target.scope().end(), walk[k]);
    if (it != target.scope().end() && *it == walk[k])
      out[k] = target_strides[static_cast<std::size_t>(it - target.scope().begin())];
  }
  return out;
}

// Odometer over a scope, last digit fastest, tracking linear offsets into other tables.
class Odometer {
 public:
  Odometer(const std::vector<std::size_t>& cards, std::vector<std::vector<std::size_t>> strides)
      : cards_(cards), digits_(cards.size(), 0), strides_(std::move(strides)), offsets_(strides_.size(), 0) {}

  std::size_t offset(std::size_t table) const { return offsets_[table]; }
  const std::vector<std::size_t>& digits() const { return digits_; }

  void next() {
    for (std::size_t k = cards_.size(); k-- > 0;) {
      if (++digits_[k] < cards_[k]) {
        for (std::size_t t = 0; t < strides_.size(); ++t) offsets_[t] += strides_[t][k];
        return;
      }
      digits_[k] = 0;
      for (std::size_t t = 0; t < strides_.size(); ++t) offsets_[t] -= strides_[t][k] * (cards_[k] - 1);
    }
  }

 private:
  const std::vector<std::size_t>& cards_;
  std::vector<std::size_t> digits_;
  std::vector<std::vector<std::size_t>> strides_;
  std::vector<std::size_t> offsets_;
};

void require_sorted_unique(const std::vector<VarId>& scope) {
  for (std::size_t k = 1; k < scope.size(); ++k)
    if (scope[k - 1] >= scope[k]) throw ScopeMismatchError("factor scope must be sorted ascending without repeats");
}

template <typename Reduce>
Factor marginalize(const Factor& f, std::span<const VarId> drop, Reduce reduce) {
  for (VarId u : drop)
    if (!f.contains(u))
      throw ScopeMismatchError("cannot marginalize variable " + std::to_string(u) + " absent from the scope");
  std::vector<VarId> scope;
  std::vector<std::size_t> cards;
  for (std::size_t k = 0; k < f.scope().size(); ++k) {
    if (std::find(drop.begin(), drop.end(), f.scope()[k]) != drop.end()) continue;
    scope.push_back(f.scope()[k]);
    cards.push_back(f.cardinalities()[k]);
  }
  Factor out = Factor::ones(scope, cards);
  std::vector<double> acc(out.size(), 0.0);
  Odometer odo(f.cardinalities(), {strides_in(f.scope(), out)});
  for (std::size_t k = 0; k < f.size(); ++k, odo.next()) {
    double& slot = acc[odo.offset(0)];
    slot = reduce(slot, f.values()[k]);
  }
  return Factor(std::move(scope), std::move(cards), std::move(acc), f.log_scale());
}

}  // namespace

Factor::Factor() : values_{1.0} {}

Factor::Factor(std::vector<VarId> scope, std::vector<std::size_t> cardinalities, std::vector<double> values,
               double log_scale)
    : scope_(std::move(scope)), cards_(std::move(cardinalities)), values_(std::move(values)), log_scale_(log_scale) {
  require_sorted_unique(scope_);
  if (cards_.size() != scope_.size()) throw ScopeMismatchError("one cardinality per scope variable is required");
  if (values_.size() != table_size(cards_))
    throw ScopeMismatchError("table length " + std::to_string(values_.size()) + " does not match scope size " +
                             std::to_string(table_size(cards_)));
  for (double v : values_)
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("factor entries must be finite and non-negative");
  if (std::isnan(log_scale_) || log_scale_ == std::numeric_limits<double>::infinity())
    throw std::invalid_argument("factor log_scale must be finite or -inf");
}

Factor Factor::constant(double value, double log_scale) { return Factor({}, {}, {value}, log_scale); }

Factor Factor::ones(std::vector<VarId> scope, std::vector<std::size_t> cardinalities) {
  std::vector<double> values(table_size(cardinalities), 1.0);
  return Factor(std::move(scope), std::move(cardinalities), std::move(values));
}

bool Factor::contains(VarId u) const { return std::binary_search(scope_.begin(), scope_.end(), u); }

std::size_t Factor::cardinality_of(VarId u) const {
  auto it = std::lower_bound(scope_.begin(), scope_.end(), u);
  if (it == scope_.end() || *it != u) throw ScopeMismatchError("variable " + std::to_string(u) + " not in scope");
  return cards_[static_cast<std::size_t>(it - scope_.begin())];
}

std::size_t Factor::index(std::span<const std::size_t> states) const {
  if (states.size() != scope_.size()) throw ScopeMismatchError("assignment length does not match scope");
  std::size_t idx = 0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (states[k] >= cards_[k]) throw std::out_of_range("state index out of range");
    idx = idx * cards_[k] + states[k];
  }
  return idx;
}

std::size_t Factor::index_from(const Assignment& x) const {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < scope_.size(); ++k) idx = idx * cards_[k] + x.at(scope_[k]);
  return idx;
}

std::vector<std::size_t> Factor::states_of(std::size_t k) const {
  std::vector<std::size_t> states(scope_.size());
  for (std::size_t d = scope_.size(); d-- > 0;) {
    states[d] = k % cards_[d];
    k /= cards_[d];
  }
  return states;
}

double Factor::linear(std::size_t k) const {
  if (values_[k] == 0.0) return 0.0;
  return values_[k] * std::exp(log_scale_);
}

std::vector<double> Factor::linear_values() const {
  std::vector<double> out(values_.size());
  for (std::size_t k = 0; k < values_.size(); ++k) out[k] = linear(k);
  return out;
}

double Factor::mass() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

double Factor::log_mass() const {
  const double m = mass();
  if (m == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(m) + log_scale_;
}

Factor Factor::rescaled() const {
  const double top = *std::max_element(values_.begin(), values_.end());
  if (top == 0.0 || top == 1.0) return *this;
  std::vector<double> values(values_);
  for (double& v : values) v /= top;
  return Factor(scope_, cards_, std::move(values), log_scale_ + std::log(top));
}

Factor Factor::flattened() const { return Factor(scope_, cards_, linear_values()); }

Factor multiply(const Factor& f, const Factor& g, std::size_t scope_cap) {
  std::vector<VarId> scope;
  std::vector<std::size_t> cards;
  std::size_t a = 0, b = 0;
  while (a < f.scope().size() || b < g.scope().size()) {
    if (b == g.scope().size() || (a < f.scope().size() && f.scope()[a] < g.scope()[b])) {
      scope.push_back(f.scope()[a]);
      cards.push_back(f.cardinalities()[a++]);
    } else if (a == f.scope().size() || g.scope()[b] < f.scope()[a]) {
      scope.push_back(g.scope()[b]);
      cards.push_back(g.cardinalities()[b++]);
    } else {
      if (f.cardinalities()[a] != g.cardinalities()[b])
        throw ScopeMismatchError("variable " + std::to_string(f.scope()[a]) + " has inconsistent cardinalities");
      scope.push_back(f.scope()[a]);
      cards.push_back(f.cardinalities()[a]);
      ++a;
      ++b;
    }
  }
  if (scope.size() > scope_cap)
    throw ScopeOverflowError("product scope of " + std::to_string(scope.size()) + " variables exceeds the cap of " +
                             std::to_string(scope_cap));

  const std::size_t n = table_size(cards);
  std::vector<double> values(n);
  Odometer odo(cards, {strides_in(scope, f), strides_in(scope, g)});
  for (std::size_t k = 0; k < n; ++k, odo.next()) values[k] = f.values()[odo.offset(0)] * g.values()[odo.offset(1)];
  return Factor(std::move(scope), std::move(cards), std::move(values), f.log_scale() + g.log_scale());
}

Factor marginalize_sum(const Factor& f, std::span<const VarId> drop) {
  return marginalize(f, drop, [](double acc, double v) { return acc + v; });
}

Factor marginalize_max(const Factor& f, std::span<const VarId> drop) {
  return marginalize(f, drop, [](double acc, double v) { return std::max(acc, v); });
}

Factor restrict(const Factor& f, const EvidenceSet& ev) {
  std::vector<std::size_t> constrained;
  for (std::size_t d = 0; d < f.scope().size(); ++d)
    if (ev.constrains(f.scope()[d])) constrained.push_back(d);
  if (constrained.empty()) return f;

  std::vector<double> values = f.values();
  Odometer odo(f.cardinalities(), {});
  for (std::size_t k = 0; k < values.size(); ++k, odo.next()) {
    for (std::size_t d : constrained)
      if (!ev.allows(f.scope()[d], odo.digits()[d])) {
        values[k] = 0.0;
        break;
      }
  }
  return Factor(f.scope(), f.cardinalities(), std::move(values), f.log_scale());
}

Factor divide(const Factor& f, const Factor& g) {
  for (std::size_t k = 0; k < g.scope().size(); ++k) {
    if (!f.contains(g.scope()[k]))
      throw ScopeMismatchError("divisor scope must be contained in the dividend scope");
    if (f.cardinality_of(g.scope()[k]) != g.cardinalities()[k])
      throw ScopeMismatchError("variable " + std::to_string(g.scope()[k]) + " has inconsistent cardinalities");
  }
  std::vector<double> values(f.size());
  Odometer odo(f.cardinalities(), {strides_in(f.scope(), g)});
  for (std::size_t k = 0; k < f.size(); ++k, odo.next()) {
    const double num = f.values()[k];
    const double den = g.values()[odo.offset(0)];
    if (den == 0.0) {
      if (num != 0.0) throw DivisionInconsistencyError("division of a positive entry by zero");
      values[k] = 0.0;
    } else {
      values[k] = num / den;
    }
  }
  return Factor(f.scope(), f.cardinalities(), std::move(values), f.log_scale() - g.log_scale());
}

Normalized normalize(const Factor& f) {
  const double total = f.mass();
  if (total == 0.0) throw ZeroMassError("cannot normalize a factor with zero total mass");
  std::vector<double> values(f.values());
  for (double& v : values) v /= total;
  return {Factor(f.scope(), f.cardinalities(), std::move(values)), std::log(total) + f.log_scale()};
}

Factor slice(const Factor& f, std::span<const VarId> vars, std::span<const std::size_t> states) {
  if (vars.size() != states.size()) throw ScopeMismatchError("one state per fixed variable is required");
  std::vector<VarId> scope;
  std::vector<std::size_t> cards;
  std::vector<std::size_t> fixed(f.scope().size(), std::numeric_limits<std::size_t>::max());
  for (std::size_t k = 0; k < vars.size(); ++k) {
    auto it = std::lower_bound(f.scope().begin(), f.scope().end(), vars[k]);
    if (it == f.scope().end() || *it != vars[k])
      throw ScopeMismatchError("cannot fix variable " + std::to_string(vars[k]) + " absent from the scope");
    const auto d = static_cast<std::size_t>(it - f.scope().begin());
    if (states[k] >= f.cardinalities()[d]) throw std::out_of_range("state index out of range");
    fixed[d] = states[k];
  }
  std::size_t base = 0;
  const auto strides = own_strides(f.cardinalities());
  std::vector<std::size_t> free_strides;
  for (std::size_t d = 0; d < f.scope().size(); ++d) {
    if (fixed[d] != std::numeric_limits<std::size_t>::max()) {
      base += fixed[d] * strides[d];
    } else {
      scope.push_back(f.scope()[d]);
      cards.push_back(f.cardinalities()[d]);
      free_strides.push_back(strides[d]);
    }
  }
  std::vector<double> values(table_size(cards));
  Odometer odo(cards, {free_strides});
  for (std::size_t k = 0; k < values.size(); ++k, odo.next()) values[k] = f.values()[base + odo.offset(0)];
  return Factor(std::move(scope), std::move(cards), std::move(values), f.log_scale());
}

Factor cpd_factor(const DiscreteNetwork& net, VarId child) {
  const Cpd& cpd = net.cpd(child);
  std::vector<VarId> scope = family(net, child);
  std::vector<std::size_t> cards = net.cardinalities(scope);
  std::vector<double> values(table_size(cards));
  Assignment x(net.size(), 0);
  Odometer odo(cards, {});
  for (std::size_t k = 0; k < values.size(); ++k, odo.next()) {
    for (std::size_t d = 0; d < scope.size(); ++d) x[scope[d]] = odo.digits()[d];
    values[k] = cpd.table[cpd_row(net, cpd, x)][x[child]];
  }
  return Factor(std::move(scope), std::move(cards), std::move(values));
}

}  // namespace exactbp
