#pragma once

// Random network generators for property tests.

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "sqpn/sqpn.hpp"

namespace sqpn::testkit {

using Rng = std::mt19937_64;

inline NodeId node_name(std::size_t i, std::size_t n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, n > 10 ? "X%02zu" : "X%zu", i);
  return NodeId(buf);
}

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Sign random_sign(Rng& rng, bool allow_zero_and_ambiguous = true) {
  static constexpr Sign all[] = {Sign::Positive, Sign::Negative, Sign::Zero, Sign::Ambiguous};
  return all[std::uniform_int_distribution<int>(0, allow_zero_and_ambiguous ? 3 : 1)(rng)];
}

/// Skeleton: node i may have parents among 0..i-1 only.
struct Skeleton {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> arcs;
};

inline Skeleton random_dag_skeleton(Rng& rng, std::size_t n, double p, std::size_t max_parents = 3) {
  Skeleton s{n, {}};
  for (std::size_t c = 1; c < n; ++c) {
    std::size_t added = 0;
    for (std::size_t q = 0; q < c && added < max_parents; ++q)
      if (uniform(rng) < p) {
        s.arcs.emplace_back(q, c);
        ++added;
      }
  }
  return s;
}

inline Skeleton chain_skeleton(std::size_t n) {
  Skeleton s{n, {}};
  for (std::size_t i = 1; i < n; ++i) s.arcs.emplace_back(i - 1, i);
  return s;
}

/// Every node but the first has exactly one parent among earlier nodes.
inline Skeleton tree_skeleton(Rng& rng, std::size_t n) {
  Skeleton s{n, {}};
  for (std::size_t i = 1; i < n; ++i) s.arcs.emplace_back(std::uniform_int_distribution<std::size_t>(0, i - 1)(rng), i);
  return s;
}

/// Signed network on the skeleton; no node is quantified.
inline Network signed_network(Rng& rng, const Skeleton& s, bool allow_zero_and_ambiguous = true) {
  Network net;
  for (std::size_t i = 0; i < s.n; ++i) net.add_node(node_name(i, s.n));
  for (auto [p, c] : s.arcs) net.add_arc(node_name(p, s.n), node_name(c, s.n), random_sign(rng, allow_zero_and_ambiguous));
  return net;
}

/// Fully quantified network on the skeleton with uniform random parameters.
inline Network quantified_network(Rng& rng, const Skeleton& s) {
  Network net;
  for (std::size_t i = 0; i < s.n; ++i) net.add_node(node_name(i, s.n));
  for (auto [p, c] : s.arcs) net.add_arc(node_name(p, s.n), node_name(c, s.n));
  for (std::size_t i = 0; i < s.n; ++i) {
    const NodeId id = node_name(i, s.n);
    const auto parents = net.parent_ids(id);
    if (parents.empty()) {
      net.set_prior(id, uniform(rng, 0.05, 0.95));
      continue;
    }
    Cpt cpt(parents);
    for (std::size_t k = 0; k < cpt.size(); ++k) cpt.set(k, uniform(rng));
    net.set_cpt(id, std::move(cpt));
  }
  return net;
}

/// A -> B -> C plus A -> C with every influence positive.
inline Network positive_triangle(Rng& rng) {
  Network net;
  const NodeId a("A"), b("B"), c("C");
  net.add_node(a, uniform(rng, 0.05, 0.95)).add_node(b).add_node(c);
  net.add_arc(a, b).add_arc(a, c).add_arc(b, c);
  const double b0 = uniform(rng);
  net.set_cpt(b, Cpt({a}, {b0, uniform(rng, b0, 1.0)}));
  // Pr(c | a, b): increasing in both parents.
  const double c00 = uniform(rng);
  const double c01 = uniform(rng, c00, 1.0);
  const double c10 = uniform(rng, c00, 1.0);
  const double c11 = uniform(rng, std::max(c01, c10), 1.0);
  net.set_cpt(c, Cpt({a, b}, {c00, c01, c10, c11}));
  return net;
}

}  // namespace sqpn::testkit
