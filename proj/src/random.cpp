#include "exactbp/random.hpp"

#include <cmath>
#include <stdexcept>

namespace exactbp {

std::size_t Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  std::size_t last_positive = weights.size();
  for (std::size_t k = 0; k < weights.size(); ++k) {
    total += weights[k];
    if (weights[k] > 0.0) last_positive = k;
  }
  if (!(total > 0.0)) throw std::invalid_argument("categorical draw from zero total weight");
  const double target = uniform() * total;
  double running = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    running += weights[k];
    if (running > target && weights[k] > 0.0) return k;
  }
  return last_positive;
}

unsigned Rng::poisson(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("Poisson rate must be positive");
  const double u = uniform();
  double p = std::exp(-rate);
  double cdf = p;
  unsigned k = 0;
  while (u >= cdf && p > 0.0) {
    ++k;
    p *= rate / k;
    cdf += p;
  }
  return k;
}

}  // namespace exactbp
