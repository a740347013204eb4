#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "exactbp/factor.hpp"
#include "exactbp/jtree.hpp"
#include "exactbp/model.hpp"

// Brute-force reference answers by enumerating joint assignments. Only the
// model and factor types are shared with the propagation engine.
namespace exactbp::oracle {

/// Most assignments any routine will enumerate. States excluded by the evidence are skipped.
inline constexpr std::size_t kMaxJointEntries = 10'000'000;

class OracleSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every entry P(x) * 1{x in evidence}; scope is the whole network.
Factor joint_table(const DiscreteNetwork& net, const EvidenceSet& ev);

double evidence_probability(const DiscreteNetwork& net, const EvidenceSet& ev);

/// sum over X_V of the product of K_u for u upstream of from -> to, evaluated literally.
Factor message(const DiscreteNetwork& net, const EvidenceSet& ev, const JunctionTree& jt, ClusterId from,
               ClusterId to);

/// P(X_vars, evidence), unnormalized.
Factor marginal(const DiscreteNetwork& net, const EvidenceSet& ev, std::vector<VarId> vars);

struct MapAnswer {
  Assignment assignment;
  double value = 0.0;
};
/// First maximizer in canonical enumeration order; nullopt when the evidence is impossible.
std::optional<MapAnswer> map(const DiscreteNetwork& net, const EvidenceSet& ev);

}  // namespace exactbp::oracle
