#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "sqpn/inference.hpp"
#include "sqpn/oracle.hpp"
#include "support/random_networks.hpp"

namespace sqpn::testkit {

/// Largest difference between the two networks' probabilities of every full
/// assignment to the nodes of `reduced`. Both must fit the enumeration cap.
inline double max_marginal_gap(const QuantifiedNetwork& full, const QuantifiedNetwork& reduced) {
  const JointTable a(full), b(reduced);
  const Network& net = reduced.network();
  double gap = 0.0;
  for (std::size_t k = 0; k < (std::size_t{1} << net.size()); ++k) {
    Evidence e;
    for (std::size_t i = 0; i < net.size(); ++i) e.values[net.id(i)] = (k >> i) & 1u;
    gap = std::max(gap, std::abs(a.probability(e) - b.probability(e)));
  }
  return gap;
}

/// An arc whose reversal keeps the graph acyclic, chosen at random.
inline std::optional<Arc> random_reversible_arc(Rng& rng, const Network& net) {
  std::vector<Arc> ok;
  for (const Arc& a : net.arcs()) {
    const auto p = net.index(a.parent), c = net.index(a.child);
    if (!has_directed_path(net, p, c, std::pair{p, c})) ok.push_back(a);
  }
  if (ok.empty()) return std::nullopt;
  return ok[std::uniform_int_distribution<std::size_t>(0, ok.size() - 1)(rng)];
}

}  // namespace sqpn::testkit
