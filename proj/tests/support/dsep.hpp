#pragma once

// Brute-force d-separation: enumerate every simple path in the skeleton and
// check each intermediate node against the evidence.

#include <set>
#include <vector>

#include "sqpn/model.hpp"

namespace sqpn::testkit {

inline std::vector<bool> evidence_or_descendant_observed(const Network& net, const Evidence& e) {
  std::vector<bool> out(net.size(), false);
  for (std::size_t v = 0; v < net.size(); ++v) {
    std::vector<std::size_t> stack{v};
    std::vector<bool> seen(net.size(), false);
    seen[v] = true;
    while (!stack.empty() && !out[v]) {
      auto u = stack.back();
      stack.pop_back();
      if (e.contains(net.id(u))) out[v] = true;
      for (auto w : net.children(u))
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
    }
  }
  return out;
}

/// Nodes outside the evidence that are d-connected to `source`.
inline std::set<NodeId> dconnected(const Network& net, const Evidence& e, const NodeId& source) {
  const auto opened = evidence_or_descendant_observed(net, e);
  std::set<NodeId> out;
  const auto s = net.index(source);
  std::vector<std::size_t> path{s};
  std::vector<bool> on(net.size(), false);
  on[s] = true;

  auto neighbours = [&](std::size_t u) {
    std::vector<std::size_t> v = net.parents(u);
    v.insert(v.end(), net.children(u).begin(), net.children(u).end());
    return v;
  };
  auto into = [&](std::size_t from, std::size_t to) { return net.arc(net.id(from), net.id(to)) != nullptr; };

  auto dfs = [&](auto&& self, std::size_t u) -> void {
    for (auto v : neighbours(u)) {
      if (on[v]) continue;
      if (path.size() >= 2) {
        const auto prev = path[path.size() - 2];
        const bool collider = into(prev, u) && into(v, u);
        if (collider ? !opened[u] : e.contains(net.id(u))) continue;
      }
      if (!e.contains(net.id(v))) out.insert(net.id(v));
      on[v] = true;
      path.push_back(v);
      self(self, v);
      path.pop_back();
      on[v] = false;
    }
  };
  dfs(dfs, s);
  return out;
}

}  // namespace sqpn::testkit
