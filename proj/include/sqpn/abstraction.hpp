#pragma once

// Construction of the interval network: interval influences from CPTs and
// signs, reverse influences (default and tightened), and intercausal signs.

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "sqpn/algebra.hpp"
#include "sqpn/inference.hpp"
#include "sqpn/model.hpp"

namespace sqpn {

enum class InfluenceOrigin { FromSign, FromCpt, DefaultReverse, TightenedReverse, Resolved, Pinned };

inline std::string_view to_string(InfluenceOrigin o) {
  switch (o) {
    case InfluenceOrigin::FromSign: return "from-sign";
    case InfluenceOrigin::FromCpt: return "from-cpt";
    case InfluenceOrigin::DefaultReverse: return "default-reverse";
    case InfluenceOrigin::TightenedReverse: return "tightened-reverse";
    case InfluenceOrigin::Resolved: return "resolved";
    case InfluenceOrigin::Pinned: return "pinned";
  }
  return "?";
}

struct IntervalInfluence {
  NodeId source;
  NodeId target;
  Interval interval;
  InfluenceOrigin origin = InfluenceOrigin::FromSign;
  /// Set on a reverse influence when the exact (Bayes) interval falls outside
  /// the root-node bound [0, max{x, 1-x}] or its negative mirror.
  bool root_bound_conflict = false;
};

struct IntercausalKey {
  NodeId child;
  bool observed_value;
  NodeId first;
  NodeId second;

  friend auto operator<=>(const IntercausalKey&, const IntercausalKey&) = default;
  friend bool operator==(const IntercausalKey&, const IntercausalKey&) = default;
};

/// Interval influences in both directions of every arc of `base`, plus the
/// intercausal intervals between parent pairs.
class IntervalNetwork {
 public:
  using Key = std::pair<NodeId, NodeId>;

  IntervalNetwork() = default;
  explicit IntervalNetwork(Network base) : base_(std::move(base)) {}

  const Network& base() const noexcept { return base_; }
  const std::map<Key, IntervalInfluence>& influences() const noexcept { return influences_; }
  const std::map<IntercausalKey, Interval>& intercausal() const noexcept { return intercausal_; }

  const IntervalInfluence* find(const NodeId& source, const NodeId& target) const {
    auto it = influences_.find({source, target});
    return it == influences_.end() ? nullptr : &it->second;
  }

  const IntervalInfluence& influence(const NodeId& source, const NodeId& target) const {
    if (auto* f = find(source, target)) return *f;
    throw InvalidArgument("no influence " + source.str() + " -> " + target.str());
  }

  /// Unit interval of the synergy sign; [-1, 1] when nothing is known.
  Interval intercausal_interval(const NodeId& child, bool value, NodeId a, NodeId b) const {
    if (b < a) std::swap(a, b);
    auto it = intercausal_.find(IntercausalKey{child, value, a, b});
    return it == intercausal_.end() ? sign_to_unit_interval(Sign::Ambiguous) : it->second;
  }

  void set_influence(IntervalInfluence f) {
    Key k{f.source, f.target};
    influences_.insert_or_assign(std::move(k), std::move(f));
  }

  void set_intercausal(IntercausalKey k, Interval v) { intercausal_.insert_or_assign(std::move(k), v); }

 private:
  Network base_;
  std::map<Key, IntervalInfluence> influences_;
  std::map<IntercausalKey, Interval> intercausal_;
};

namespace detail {

inline double snap(double v) noexcept { return std::abs(v) < 1e-12 ? 0.0 : v; }

/// Position of `parent` among the canonical parents of `child`.
inline std::size_t parent_slot(const Network& net, std::size_t child, std::size_t parent) {
  const auto& ps = net.parents(child);
  auto it = std::find(ps.begin(), ps.end(), parent);
  if (it == ps.end()) throw InvalidArgument("'" + net.id(parent).str() + "' is not a parent of '" + net.id(child).str() + "'");
  return static_cast<std::size_t>(it - ps.begin());
}

/// Calls fn(index_with_parent_false, index_with_parent_true) for every
/// configuration of the other parents.
template <class Fn>
void for_each_context(std::size_t parent_count, std::size_t slot, Fn fn) {
  const std::size_t bit = std::size_t{1} << (parent_count - 1 - slot);
  const std::size_t total = std::size_t{1} << parent_count;
  for (std::size_t idx = 0; idx < total; ++idx)
    if (!(idx & bit)) fn(idx, idx | bit);
}

inline void require_cpt(const Network& net, std::size_t child) {
  if (!net.has_cpt(child) || !net.quantified(child))
    throw PreconditionError("node '" + net.id(child).str() + "' has no complete CPT");
}

inline bool quantified_root(const Network& net, std::size_t i) { return net.parents(i).empty() && net.quantified(i); }

}  // namespace detail

/// [min, max] over contexts x of Pr(child | parent, x) - Pr(child | !parent, x).
inline Interval influence_interval_from_cpt(const Network& net, const Arc& arc) {
  const auto c = net.index(arc.child), p = net.index(arc.parent);
  detail::require_cpt(net, c);
  const auto table = net.table(c);
  const auto k = net.parents(c).size();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  detail::for_each_context(k, detail::parent_slot(net, c, p), [&](std::size_t off, std::size_t on) {
    const double d = detail::snap(table[on] - table[off]);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  });
  return {lo, hi};
}

inline Sign abstract_cpt_to_sign(const Network& net, const Arc& arc) { return classify(influence_interval_from_cpt(net, arc)); }

/// Sign of an arc: its declared sign when the child is unquantified,
/// otherwise the sign abstracted from the child's CPT.
inline Sign arc_sign(const Network& net, const Arc& arc) {
  if (net.has_cpt(net.index(arc.child))) return abstract_cpt_to_sign(net, arc);
  return declared_arc_sign(arc);
}

inline Interval default_reverse(const Interval& forward) { return sign_to_unit_interval(classify(forward)); }
inline Interval default_reverse(const IntervalInfluence& forward) { return default_reverse(forward.interval); }

/// Reverse influence on a root node with prior x and a single child.
inline Interval tighten_reverse_root(double prior, Sign forward_class) {
  if (!(prior >= 0.0 && prior <= 1.0)) throw PreconditionError("prior outside [0, 1]");
  const double m = std::max(prior, 1.0 - prior);
  switch (forward_class) {
    case Sign::Positive: return {0.0, m};
    case Sign::Negative: return {-m, 0.0};
    default: throw PreconditionError("root tightening needs a positive or negative forward influence");
  }
}

/// True when the exact reverse interval of `arc` is computable from the
/// family of the child alone: the parent is a quantified root, the child has
/// a complete CPT, and every other parent of the child is a quantified root.
inline bool bayes_applicable(const Network& net, const Arc& arc) {
  const auto c = net.index(arc.child), p = net.index(arc.parent);
  if (!detail::quantified_root(net, p) || !net.has_cpt(c) || !net.quantified(c)) return false;
  for (auto q : net.parents(c))
    if (!detail::quantified_root(net, q)) return false;
  return true;
}

/// [min, max] over contexts x of Pr(parent | child, x) - Pr(parent | !child, x),
/// by Bayes' theorem within the child's family. In a context where the child
/// does not depend on the parent (or the parent is deterministic) the
/// difference is 0.
inline Interval tighten_reverse_bayes(const Network& net, const Arc& arc) {
  if (!bayes_applicable(net, arc))
    throw PreconditionError("insufficient quantification to tighten " + arc.child.str() + " -> " + arc.parent.str());
  const auto c = net.index(arc.child), p = net.index(arc.parent);
  const double x = *net.node(p).prior;
  const auto table = net.table(c);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  detail::for_each_context(net.parents(c).size(), detail::parent_slot(net, c, p), [&](std::size_t off, std::size_t on) {
    const double b1 = table[on], b0 = table[off];
    const double pb = x * b1 + (1.0 - x) * b0;
    double d = 0.0;
    if (pb > 0.0 && pb < 1.0 && b1 != b0) d = x * b1 / pb - x * (1.0 - b1) / (1.0 - pb);
    d = detail::snap(d);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  });
  return {std::max(-1.0, lo), std::min(1.0, hi)};
}

/// Sign of the product synergy of (a, b) on `child` for the observed value:
/// per context, the 2x2 determinant
///   P(ab)P(!a!b) - P(!ab)P(a!b)
/// with P(..) = Pr(child = value | ..), aggregated over contexts of the
/// remaining parents.
inline Sign synergy_sign_from_cpt(const Network& net, const NodeId& child, bool value, const NodeId& a, const NodeId& b) {
  const auto c = net.index(child);
  detail::require_cpt(net, c);
  if (a == b) throw PreconditionError("synergy needs two distinct parents");
  const auto k = net.parents(c).size();
  const auto sa = detail::parent_slot(net, c, net.index(a));
  const auto sb = detail::parent_slot(net, c, net.index(b));
  const std::size_t ba = std::size_t{1} << (k - 1 - sa), bb = std::size_t{1} << (k - 1 - sb);
  const auto table = net.table(c);
  auto pr = [&](std::size_t idx) { return value ? table[idx] : 1.0 - table[idx]; };
  bool all_zero = true, all_nonneg = true, all_nonpos = true;
  for (std::size_t idx = 0; idx < table.size(); ++idx) {
    if (idx & (ba | bb)) continue;
    const double det = detail::snap(pr(idx | ba | bb) * pr(idx) - pr(idx | bb) * pr(idx | ba));
    if (det != 0.0) all_zero = false;
    if (det < 0.0) all_nonneg = false;
    if (det > 0.0) all_nonpos = false;
  }
  if (all_zero) return Sign::Zero;
  if (all_nonneg) return Sign::Positive;
  if (all_nonpos) return Sign::Negative;
  return Sign::Ambiguous;
}

struct AbstractionOptions {
  /// Tighten reverse influences beyond the child's family by exact inference
  /// on the ancestral closure, when it is quantified and small enough.
  bool oracle_tightening = false;
  std::size_t oracle_node_cap = 16;
};

namespace detail {

/// Reverse interval by exact inference over contexts of the child's other
/// parents. Zero-probability contexts are skipped.
inline std::optional<Interval> oracle_reverse(const Network& net, const Arc& arc, std::size_t cap) {
  const auto c = net.index(arc.child);
  std::vector<NodeId> others;
  for (auto q : net.parents(c))
    if (net.id(q) != arc.parent) others.push_back(net.id(q));
  Network sub = ancestral_subnetwork(net, {arc.child});
  if (sub.size() > cap || !sub.fully_quantified() || !validate(sub).valid()) return std::nullopt;
  QuantifiedNetwork q(std::move(sub));
  JointTable joint(q);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t ctx = 0; ctx < (std::size_t{1} << others.size()); ++ctx) {
    Evidence e;
    for (std::size_t k = 0; k < others.size(); ++k) e.values[others[k]] = (ctx >> k) & 1u;
    Evidence with = e, without = e;
    with.values[arc.child] = true;
    without.values[arc.child] = false;
    if (joint.probability(with) <= 0.0 || joint.probability(without) <= 0.0) continue;
    const double d = snap(joint.posterior(with, arc.parent) - joint.posterior(without, arc.parent));
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  if (lo > hi) return std::nullopt;
  return Interval{std::max(-1.0, lo), std::min(1.0, hi)};
}

}  // namespace detail

/// Forward interval of an arc: from the child's CPT when it has one,
/// otherwise the unit interval of the arc's sign.
inline IntervalInfluence forward_influence(const Network& net, const Arc& arc) {
  if (net.has_cpt(net.index(arc.child)))
    return {arc.parent, arc.child, influence_interval_from_cpt(net, arc), InfluenceOrigin::FromCpt};
  return {arc.parent, arc.child, sign_to_unit_interval(declared_arc_sign(arc)), InfluenceOrigin::FromSign};
}

/// Reverse interval of an arc: Bayes within the family when possible, then
/// (opt-in) exact inference, then the single-child root bound, then the
/// default unit interval.
inline IntervalInfluence reverse_influence(const Network& net, const Arc& arc, const Interval& forward,
                                           const AbstractionOptions& opts = {}) {
  const auto p = net.index(arc.parent);
  const Sign cls = classify(forward);
  const bool root_ok = detail::quantified_root(net, p) && net.children(p).size() == 1 &&
                       (cls == Sign::Positive || cls == Sign::Negative);
  if (bayes_applicable(net, arc)) {
    IntervalInfluence f{arc.child, arc.parent, tighten_reverse_bayes(net, arc), InfluenceOrigin::TightenedReverse};
    if (root_ok) f.root_bound_conflict = !tighten_reverse_root(*net.node(p).prior, cls).contains(f.interval, kTolerance);
    return f;
  }
  if (opts.oracle_tightening)
    if (auto r = detail::oracle_reverse(net, arc, opts.oracle_node_cap))
      return {arc.child, arc.parent, *r, InfluenceOrigin::TightenedReverse};
  if (root_ok)
    return {arc.child, arc.parent, tighten_reverse_root(*net.node(p).prior, cls), InfluenceOrigin::TightenedReverse};
  return {arc.child, arc.parent, default_reverse(forward), InfluenceOrigin::DefaultReverse};
}

/// Sign of the intercausal influence between parents a and b of `child`
/// given its value: declared synergy first, then the CPT, else '?'.
inline Sign intercausal_sign(const Network& net, const NodeId& child, bool value, const NodeId& a, const NodeId& b) {
  if (const SynergyDecl* s = net.synergy(child, value, a, b)) return s->sign;
  if (net.has_cpt(net.index(child)) && net.quantified(net.index(child))) return synergy_sign_from_cpt(net, child, value, a, b);
  return Sign::Ambiguous;
}

inline IntervalNetwork build_interval_network(const Network& net, const AbstractionOptions& opts = {}) {
  require_valid(net);
  IntervalNetwork out(net);
  for (const Arc& a : net.arcs()) {
    IntervalInfluence fwd = forward_influence(net, a);
    IntervalInfluence rev = reverse_influence(net, a, fwd.interval, opts);
    out.set_influence(std::move(fwd));
    out.set_influence(std::move(rev));
  }
  for (std::size_t c = 0; c < net.size(); ++c) {
    const auto& ps = net.parents(c);
    for (std::size_t x = 0; x < ps.size(); ++x)
      for (std::size_t y = x + 1; y < ps.size(); ++y)
        for (bool value : {false, true}) {
          const NodeId &a = net.id(ps[x]), &b = net.id(ps[y]);
          out.set_intercausal(IntercausalKey{net.id(c), value, a, b},
                              sign_to_unit_interval(intercausal_sign(net, net.id(c), value, a, b)));
        }
  }
  for (const PinnedInfluence& pin : net.pins())
    out.set_influence(IntervalInfluence{pin.source, pin.target, pin.interval, InfluenceOrigin::Pinned});
  return out;
}

}  // namespace sqpn
