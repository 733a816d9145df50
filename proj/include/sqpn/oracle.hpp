#pragma once

// Exact structural operations on quantified networks (arc reversal, node
// reduction), local trade-off resolution built on them, and an empirical
// soundness audit of interval propagation against exact inference.

#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sqpn/abstraction.hpp"
#include "sqpn/inference.hpp"
#include "sqpn/model.hpp"
#include "sqpn/propagate.hpp"

namespace sqpn {

namespace detail {

using Assignment = std::map<NodeId, bool>;

/// Pr(node = true | its parents as given by `a`).
inline double cpt_value(const Network& net, const NodeId& node, const Assignment& a) {
  const auto i = net.index(node);
  const Node& n = net.node(i);
  if (!n.cpt) return *n.prior;
  std::size_t idx = 0;
  for (auto p : net.parents(i)) idx = (idx << 1) | (a.at(net.id(p)) ? 1u : 0u);
  return n.cpt->at(idx);
}

/// Calls fn(assignment) for every assignment of `vars`.
template <class Fn>
void for_each_assignment(const std::vector<NodeId>& vars, Fn fn) {
  const std::size_t k = vars.size();
  Assignment a;
  for (std::size_t idx = 0; idx < (std::size_t{1} << k); ++idx) {
    const auto cfg = Cpt::config_of(idx, k);
    for (std::size_t j = 0; j < k; ++j) a[vars[j]] = cfg[j];
    fn(idx, a);
  }
}

inline std::vector<NodeId> sorted_union(std::vector<NodeId> a, const std::vector<NodeId>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

inline std::vector<NodeId> without(std::vector<NodeId> v, const NodeId& x) {
  std::erase(v, x);
  return v;
}

/// Sets a node's distribution: a prior when it has no parents, a CPT over
/// `parents` otherwise.
template <class Fn>
void assign_distribution(Network& net, const NodeId& node, const std::vector<NodeId>& parents, Fn value_at) {
  if (parents.empty()) {
    net.set_cpt(node, std::nullopt);
    net.set_prior(node, value_at(Assignment{}));
    return;
  }
  Cpt cpt(parents);
  for_each_assignment(cpt.parents(), [&](std::size_t idx, const Assignment& a) { cpt.set(idx, value_at(a)); });
  net.set_prior(node, std::nullopt);
  net.set_cpt(node, std::move(cpt));
}

}  // namespace detail

/// Reverses parent -> child, recomputing both CPTs by Bayes' theorem so that
/// the joint distribution is unchanged. Both endpoints end up with the union
/// of their former parents (minus each other); the old child becomes a
/// parent of the old parent.
inline QuantifiedNetwork reverse_arc(const QuantifiedNetwork& qnet, const Arc& arc) {
  const Network& net = qnet.network();
  const NodeId &a = arc.parent, &b = arc.child;
  if (!net.arc(a, b)) throw InvalidArgument("no arc " + a.str() + " -> " + b.str());
  if (has_directed_path(net, net.index(a), net.index(b), std::pair{net.index(a), net.index(b)}))
    throw PreconditionError("reversing " + a.str() + " -> " + b.str() + " would create a cycle");

  const auto pa_a = net.parent_ids(a);
  const auto pa_b = detail::without(net.parent_ids(b), a);
  const auto u = detail::sorted_union(pa_a, pa_b);

  Network out = net;
  out.remove_arc(a, b);
  for (const auto& x : u) {
    if (!out.arc(x, b)) out.add_arc(x, b);
    if (!out.arc(x, a)) out.add_arc(x, a);
  }
  out.add_arc(b, a);
  out.remove_synergies(a).remove_synergies(b);

  auto pr_b = [&](const detail::Assignment& ctx, bool a_val) {
    detail::Assignment full = ctx;
    full[a] = a_val;
    return detail::cpt_value(net, b, full);
  };
  // Pr(b | u)
  detail::assign_distribution(out, b, u, [&](const detail::Assignment& ctx) {
    const double pa = detail::cpt_value(net, a, ctx);
    return pa * pr_b(ctx, true) + (1.0 - pa) * pr_b(ctx, false);
  });
  // Pr(a | b, u); falls back to Pr(a | u) where the conditioning event is null.
  detail::assign_distribution(out, a, detail::sorted_union(u, {b}), [&](const detail::Assignment& ctx) {
    const double pa = detail::cpt_value(net, a, ctx);
    const double b1 = pr_b(ctx, true), b0 = pr_b(ctx, false);
    const double pb = pa * b1 + (1.0 - pa) * b0;
    if (ctx.at(b)) return pb > 0.0 ? pa * b1 / pb : pa;
    return pb < 1.0 ? pa * (1.0 - b1) / (1.0 - pb) : pa;
  });
  return QuantifiedNetwork(std::move(out));
}

/// Removes `node` by marginalization. A barren node is simply deleted.
/// Otherwise arcs to all but the topologically last child are reversed, and
/// the node is summed out of that last child, whose CPT then ranges over its
/// other parents and the removed node's parents.
inline QuantifiedNetwork reduce_node(const QuantifiedNetwork& qnet, const NodeId& node) {
  QuantifiedNetwork cur = qnet;
  cur.network().index(node);
  while (cur.network().children(cur.network().index(node)).size() > 1) {
    const Network& net = cur.network();
    const auto order = topo_indices(net);
    std::size_t first = net.size();
    for (auto v : order)
      if (net.arc(node, net.id(v))) {
        first = v;
        break;
      }
    cur = reverse_arc(cur, Arc{node, net.id(first), std::nullopt});
  }

  const Network& net = cur.network();
  const auto kids = net.children(net.index(node));
  Network out = net;
  if (kids.empty()) {
    out.remove_node(node);
    return QuantifiedNetwork(std::move(out));
  }
  const NodeId child = net.id(kids.front());
  const auto pa_x = net.parent_ids(node);
  const auto parents = detail::sorted_union(detail::without(net.parent_ids(child), node), pa_x);
  out.remove_node(node);
  for (const auto& x : pa_x)
    if (!out.arc(x, child)) out.add_arc(x, child);
  out.remove_synergies(child);
  detail::assign_distribution(out, child, parents, [&](const detail::Assignment& ctx) {
    detail::Assignment full = ctx;
    const double px = detail::cpt_value(net, node, ctx);
    full[node] = true;
    const double c1 = detail::cpt_value(net, child, full);
    full[node] = false;
    const double c0 = detail::cpt_value(net, child, full);
    return px * c1 + (1.0 - px) * c0;
  });
  return QuantifiedNetwork(std::move(out));
}

struct ResolutionOutcome {
  Interval net_influence;
  std::vector<NodeId> removed_nodes;
  bool resolved = false;
};

struct ResolveOptions {
  /// Re-abstract reduced CPTs to signs instead of intervals.
  bool sign_only = false;
};

/// The nodes strictly between `source` and `target` on directed paths.
inline std::vector<NodeId> interior_nodes(const Network& net, const NodeId& source, const NodeId& target) {
  const auto s = net.index(source), t = net.index(target);
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < net.size(); ++i)
    if (i != s && i != t && has_directed_path(net, s, i) && has_directed_path(net, i, t)) out.push_back(net.id(i));
  return out;
}

/// The fully quantified cluster in which a trade-off between `source` and
/// `target` is resolved: source, target and the interior nodes, with every
/// outside parent of the target or an interior node kept as a root. Roots
/// get prior 0.5; their values only act as contexts.
inline QuantifiedNetwork tradeoff_cluster(const Network& net, const NodeId& source, const NodeId& target) {
  const auto interior = interior_nodes(net, source, target);
  std::set<NodeId> members(interior.begin(), interior.end());
  members.insert(target);
  for (const auto& id : members) {
    const auto i = net.index(id);
    if (!net.has_cpt(i) || !net.quantified(i))
      throw PreconditionError("cluster is not fully quantified: '" + id.str() + "' has no complete CPT");
  }
  Network c;
  c.name = net.name;
  c.add_node(source, 0.5);
  for (const auto& id : members) c.add_node(id);
  for (const auto& id : members)
    for (const auto& p : net.parent_ids(id))
      if (!c.contains(p)) c.add_node(p, 0.5);
  for (const auto& id : members) {
    for (const auto& p : net.parent_ids(id)) c.add_arc(p, id);
    c.set_cpt(id, net.node(id).cpt);
  }
  return QuantifiedNetwork(std::move(c));
}

/// Local trade-off resolution: interior nodes between source and
/// target are removed one at a time, children first, until the net influence
/// of source on target is no longer ambiguous.
inline ResolutionOutcome resolve_tradeoff(const Network& net, const NodeId& source, const NodeId& target,
                                          const ResolveOptions& opts = {}) {
  require_valid(net);
  const auto s = net.index(source), t = net.index(target);
  if (s == t) throw InvalidArgument("source and target must differ");
  ResolutionOutcome out;
  if (!has_directed_path(net, s, t)) {
    out.net_influence = Interval{};
    out.resolved = true;
    return out;
  }
  QuantifiedNetwork cluster = tradeoff_cluster(net, source, target);

  auto net_influence = [&](const Network& c) {
    if (opts.sign_only) {
      auto r = propagate_signs(c, Evidence{}, SignObservation{source, Sign::Positive});
      return sign_to_unit_interval(r.at(target));
    }
    auto r = propagate_intervals(build_interval_network(c), Evidence{}, Observation{source, true, Interval::point(1.0)});
    return r.at(target);
  };

  std::vector<NodeId> pending;
  {
    const auto inner = interior_nodes(cluster.network(), source, target);
    for (auto i : topo_indices(cluster.network())) {
      const NodeId& id = cluster.network().id(i);
      if (std::find(inner.begin(), inner.end(), id) != inner.end()) pending.push_back(id);
    }
    std::reverse(pending.begin(), pending.end());
  }
  for (std::size_t next = 0;; ++next) {
    out.net_influence = net_influence(cluster.network());
    if (classify(out.net_influence) != Sign::Ambiguous || next == pending.size()) break;
    cluster = reduce_node(cluster, pending[next]);
    out.removed_nodes.push_back(pending[next]);
  }
  out.resolved = classify(out.net_influence) != Sign::Ambiguous;
  return out;
}

// ---------------------------------------------------------------------------
// Soundness audit

struct SoundnessRow {
  std::size_t trial = 0;
  NodeId observed;
  bool value = true;
  NodeId target;
  double delta = 0.0;
  Interval interval;
  bool contained = false;
};

struct SoundnessReport {
  std::vector<SoundnessRow> rows;

  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const SoundnessRow& r) { return !r.contained; }));
  }
  double containment_rate() const {
    return rows.empty() ? 1.0 : 1.0 - static_cast<double>(failures()) / static_cast<double>(rows.size());
  }
};

struct SoundnessOptions {
  std::uint64_t seed = 1;
  AbstractionOptions abstraction;
  /// Observe this node in every trial instead of a random one.
  std::optional<NodeId> observe;
};

/// For each trial, observes a random node (value drawn among those with
/// nonzero probability), propagates the exact entry interval and checks that
/// every node's exact change in probability lies in its propagated interval.
inline SoundnessReport soundness_report(const QuantifiedNetwork& qnet, std::size_t trials,
                                        const SoundnessOptions& opts = {}) {
  const Network& net = qnet.network();
  SoundnessReport report;
  if (net.size() == 0) return report;
  const JointTable joint(qnet);
  const IntervalNetwork inet = build_interval_network(net, opts.abstraction);
  std::mt19937_64 rng(opts.seed);
  std::vector<double> prior(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) prior[i] = joint.posterior(Evidence{}, net.id(i));

  for (std::size_t trial = 1; trial <= trials; ++trial) {
    std::size_t o = opts.observe ? net.index(*opts.observe)
                                 : std::uniform_int_distribution<std::size_t>(0, net.size() - 1)(rng);
    bool value = std::bernoulli_distribution(0.5)(rng);
    const double x = prior[o];
    if (x <= 0.0) value = false;
    if (x >= 1.0) value = true;
    const NodeId& obs = net.id(o);
    const Interval entry = entry_interval(obs, value, x, EntryMode::Exact);
    const auto result = propagate_intervals(inet, Evidence{}, Observation{obs, value, entry});
    Evidence after;
    after.values[obs] = value;
    for (std::size_t i = 0; i < net.size(); ++i) {
      SoundnessRow row;
      row.trial = trial;
      row.observed = obs;
      row.value = value;
      row.target = net.id(i);
      row.delta = joint.posterior(after, net.id(i)) - prior[i];
      row.interval = result.at(net.id(i));
      row.contained = row.interval.contains(row.delta, kTolerance);
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

inline std::string render_soundness(const SoundnessReport& report) {
  std::ostringstream os;
  os << "trial\tobservation\ttarget\tdelta\tlo\thi\tcontained\n";
  for (const auto& r : report.rows)
    os << r.trial << '\t' << r.observed << '=' << (r.value ? "true" : "false") << '\t' << r.target << '\t'
       << format_number(r.delta) << '\t' << format_number(r.interval.lo()) << '\t' << format_number(r.interval.hi())
       << '\t' << (r.contained ? "yes" : "no") << '\n';
  return os.str();
}

}  // namespace sqpn
