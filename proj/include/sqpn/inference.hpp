#pragma once

// Exact inference by full joint enumeration. Meant for desk-scale networks
// only: every query is exponential in the number of relevant nodes.

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "sqpn/error.hpp"
#include "sqpn/model.hpp"

namespace sqpn {

inline constexpr std::size_t kEnumerationCap = 20;

/// A valid network in which every node is quantified.
class QuantifiedNetwork {
 public:
  explicit QuantifiedNetwork(Network net) : net_(std::move(net)) {
    auto report = validate(net_);
    if (!report.valid()) throw PreconditionError("network is not valid: " + report.violations.front().message);
    for (std::size_t i = 0; i < net_.size(); ++i)
      if (!net_.quantified(i)) throw PreconditionError("node '" + net_.id(i).str() + "' is not quantified");
  }

  const Network& network() const noexcept { return net_; }

 private:
  Network net_;
};

/// The sub-network induced by `roots` and all their ancestors. Marginals over
/// the kept nodes equal those of the full network.
inline Network ancestral_subnetwork(const Network& net, const std::vector<NodeId>& roots) {
  std::vector<bool> keep(net.size(), false);
  std::vector<std::size_t> stack;
  for (const auto& id : roots) {
    auto i = net.index(id);
    if (!keep[i]) {
      keep[i] = true;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    auto u = stack.back();
    stack.pop_back();
    for (auto p : net.parents(u))
      if (!keep[p]) {
        keep[p] = true;
        stack.push_back(p);
      }
  }
  Network sub;
  sub.name = net.name;
  for (std::size_t i = 0; i < net.size(); ++i)
    if (keep[i]) {
      sub.add_node(net.id(i), net.node(i).prior);
      sub.set_cpt(net.id(i), net.node(i).cpt);
    }
  for (const Arc& a : net.arcs())
    if (keep[net.index(a.parent)] && keep[net.index(a.child)]) sub.add_arc(a.parent, a.child, a.sign);
  return sub;
}

/// Full joint distribution of a quantified network. Entry k is the
/// probability of the assignment in which node i is true iff bit i of k is
/// set.
class JointTable {
 public:
  explicit JointTable(const QuantifiedNetwork& qnet) : net_(&qnet.network()) {
    const Network& net = *net_;
    const std::size_t n = net.size();
    if (n > kEnumerationCap)
      throw PreconditionError("network has " + std::to_string(n) + " nodes; enumeration is capped at " +
                              std::to_string(kEnumerationCap));
    std::vector<std::vector<double>> tables(n);
    for (std::size_t i = 0; i < n; ++i) tables[i] = net.table(i);
    probs_.assign(std::size_t{1} << n, 1.0);
    for (std::uint64_t k = 0; k < probs_.size(); ++k) {
      double p = 1.0;
      for (std::size_t i = 0; i < n && p != 0.0; ++i) {
        std::size_t idx = 0;
        for (auto par : net.parents(i)) idx = (idx << 1) | ((k >> par) & 1u);
        const double t = tables[i][idx];
        p *= ((k >> i) & 1u) ? t : 1.0 - t;
      }
      probs_[k] = p;
    }
  }

  const Network& network() const noexcept { return *net_; }
  const std::vector<double>& probabilities() const noexcept { return probs_; }

  /// Pr(evidence).
  double probability(const Evidence& evidence) const {
    auto [mask, want] = masks(evidence);
    double s = 0.0;
    for (std::uint64_t k = 0; k < probs_.size(); ++k)
      if ((k & mask) == want) s += probs_[k];
    return s;
  }

  /// Pr(target = true | evidence).
  double posterior(const Evidence& evidence, const NodeId& target) const {
    auto [mask, want] = masks(evidence);
    const std::uint64_t t = std::uint64_t{1} << net_->index(target);
    double num = 0.0, den = 0.0;
    for (std::uint64_t k = 0; k < probs_.size(); ++k) {
      if ((k & mask) != want) continue;
      den += probs_[k];
      if (k & t) num += probs_[k];
    }
    if (den <= 0.0) throw InconsistentEvidence("evidence has probability zero");
    return num / den;
  }

 private:
  std::pair<std::uint64_t, std::uint64_t> masks(const Evidence& evidence) const {
    std::uint64_t mask = 0, want = 0;
    for (const auto& [id, v] : evidence.values) {
      const std::uint64_t bit = std::uint64_t{1} << net_->index(id);
      mask |= bit;
      if (v) want |= bit;
    }
    return {mask, want};
  }

  const Network* net_;
  std::vector<double> probs_;
};

/// Pr(target = true | evidence), enumerating only the ancestral closure of
/// the target and the evidence.
inline double posterior(const QuantifiedNetwork& qnet, const Evidence& evidence, const NodeId& target) {
  std::vector<NodeId> roots{target};
  for (const auto& [id, v] : evidence.values) roots.push_back(id);
  QuantifiedNetwork sub(ancestral_subnetwork(qnet.network(), roots));
  return JointTable(sub).posterior(evidence, target);
}

/// Change in Pr(target = true) occasioned by observing `node = value` on top
/// of `prior_evidence`.
inline double delta_effect(const QuantifiedNetwork& qnet, const Evidence& prior_evidence, const NodeId& node, bool value,
                           const NodeId& target) {
  if (prior_evidence.contains(node)) throw PreconditionError("observed node '" + node.str() + "' is already evidence");
  Evidence after = prior_evidence;
  after.values[node] = value;
  return posterior(qnet, after, target) - posterior(qnet, prior_evidence, target);
}

}  // namespace sqpn
