#pragma once

// Sign propagation and interval propagation by trail-based message passing.
//
// Both run the same engine. Starting from the observed node, a node whose
// value changed sends value (x) link to every neighbour reachable over an
// active link that is not on the current trail; the neighbour recurses only
// when its own value changes. A node keeps the latest message received over
// each incoming link and its value is the composition (+) of those messages.
// For signs this is exactly the running sign[to] (+) message of the classic
// algorithm, since messages only ever grow in the sign lattice. For intervals
// it avoids adding a neighbour's contribution again each time that neighbour
// re-sends its updated value.

#include <limits>
#include <map>
#include <optional>
#include <set>
#include <type_traits>
#include <vector>

#include "sqpn/abstraction.hpp"
#include "sqpn/algebra.hpp"
#include "sqpn/model.hpp"

namespace sqpn {

enum class EntryMode { Exact, Maximal, Ignorant };

/// Interval entered for an observation.
///   exact:    [1-x, 1-x] for true, [-x, -x] for false, x = prior
///   maximal:  [1, 1] or [-1, -1]
///   ignorant: [0, 1] or [-1, 0]
inline Interval entry_interval(const NodeId& node, bool value, std::optional<double> prior, EntryMode mode) {
  switch (mode) {
    case EntryMode::Exact:
      if (!prior) throw PreconditionError("exact entry for '" + node.str() + "' needs a known prior");
      if (!(*prior >= 0.0 && *prior <= 1.0)) throw InvalidArgument("prior outside [0, 1]");
      return value ? Interval::point(1.0 - *prior) : Interval::point(-*prior);
    case EntryMode::Maximal:
      return value ? Interval::point(1.0) : Interval::point(-1.0);
    case EntryMode::Ignorant:
      return value ? Interval{0.0, 1.0} : Interval{-1.0, 0.0};
  }
  throw InvalidArgument("unknown entry mode");
}

struct Observation {
  NodeId node;
  bool value = true;
  Interval strength;  ///< entry interval
};

struct SignObservation {
  NodeId node;
  Sign sign = Sign::Positive;
};

struct PropagationConfig {
  /// Per-node limit on interval changes; on the m-th change the interval is
  /// replaced by the unit interval of its sign.
  std::optional<std::size_t> m;
};

template <class Value>
struct PropagationResult {
  std::map<NodeId, Value> per_node;
  std::map<NodeId, std::size_t> visits;  ///< value changes per node
  std::set<NodeId> collapsed;            ///< nodes that hit the m-bound
  std::size_t messages = 0;              ///< messages computed

  const Value& at(const NodeId& id) const { return per_node.at(id); }
  const Value& at(const char* id) const { return per_node.at(NodeId(id)); }
};

using SignResult = PropagationResult<Sign>;
using IntervalResult = PropagationResult<Interval>;

namespace detail {

inline constexpr std::size_t kNoVia = std::numeric_limits<std::size_t>::max();

template <class Value>
struct EngineLink {
  std::size_t to;
  LinkKind kind;
  std::size_t via;
  Value weight;
};

template <class Value>
using LinkGraph = std::vector<std::vector<EngineLink<Value>>>;

/// Usable links under `evidence`, per source node, ordered by target NodeId
/// (then kind, then via). Mirrors active_links().
template <class Value, class Fwd, class Rev, class Inter>
LinkGraph<Value> build_links(const Network& net, const Evidence& evidence, Fwd fwd, Rev rev, Inter inter) {
  LinkGraph<Value> g(net.size());
  std::vector<bool> blocked(net.size(), false);
  for (const auto& [id, v] : evidence.values) blocked[net.index(id)] = true;
  for (const Arc& a : net.arcs()) {
    const auto p = net.index(a.parent), c = net.index(a.child);
    if (!blocked[c]) g[p].push_back({c, LinkKind::Forward, kNoVia, fwd(a)});
    if (!blocked[p]) g[c].push_back({p, LinkKind::Reverse, kNoVia, rev(a)});
  }
  const auto open = opened_nodes(net, evidence);
  for (std::size_t c = 0; c < net.size(); ++c) {
    if (!open[c]) continue;
    const auto& ps = net.parents(c);
    for (std::size_t x = 0; x < ps.size(); ++x)
      for (std::size_t y = x + 1; y < ps.size(); ++y) {
        const Value w = inter(c, ps[x], ps[y]);
        if (!blocked[ps[y]]) g[ps[x]].push_back({ps[y], LinkKind::Intercausal, c, w});
        if (!blocked[ps[x]]) g[ps[y]].push_back({ps[x], LinkKind::Intercausal, c, w});
      }
  }
  for (auto& out : g)
    std::sort(out.begin(), out.end(), [](const EngineLink<Value>& l, const EngineLink<Value>& r) {
      return std::tie(l.to, l.kind, l.via) < std::tie(r.to, r.kind, r.via);
    });
  return g;
}

template <class Value>
class Engine {
 public:
  static constexpr bool kInterval = std::is_same_v<Value, Interval>;

  Engine(const Network& net, const LinkGraph<Value>& links, const Evidence& evidence, std::optional<std::size_t> m)
      : net_(net), links_(links), m_(m), states_(net.size()), blocked_(net.size(), false), trail_(net.size(), false) {
    for (const auto& [id, v] : evidence.values) blocked_[net.index(id)] = true;
  }

  PropagationResult<Value> run(std::size_t origin, Value entry) {
    blocked_[origin] = true;
    states_[origin].value = entry;
    states_[origin].changes = entry == zero() ? 0 : 1;
    visit(origin, Arrival::Origin);
    if (m_) settle();

    PropagationResult<Value> r;
    for (std::size_t i = 0; i < net_.size(); ++i) {
      r.per_node.emplace(net_.id(i), states_[i].value);
      r.visits.emplace(net_.id(i), states_[i].changes);
      if (states_[i].collapsed) r.collapsed.insert(net_.id(i));
    }
    r.messages = messages_;
    return r;
  }

 private:
  struct Slot {
    std::size_t from;
    std::size_t via;
    Value message;
  };

  struct State {
    Value value = zero();
    std::vector<Slot> slots;
    std::size_t changes = 0;
    bool collapsed = false;
    Sign collapsed_sign = Sign::Zero;
    unsigned arrivals = 0;  ///< bit per Arrival the node was entered by
  };

  struct Update {
    Value value;
    bool collapse;
    Sign sign;
  };

  static Value zero() {
    if constexpr (kInterval)
      return Interval{};
    else
      return Sign::Zero;
  }

  static Value multiply(const Value& a, const Value& b) {
    if constexpr (kInterval)
      return interval_mul(a, b);
    else
      return sign_mul(a, b);
  }

  static Value compose(const std::vector<Slot>& slots, std::size_t from, std::size_t via, const Value& message) {
    bool replaced = false;
    if constexpr (kInterval) {
      std::vector<Interval> terms;
      terms.reserve(slots.size() + 1);
      for (const Slot& s : slots) {
        const bool same = s.from == from && s.via == via;
        replaced = replaced || same;
        terms.push_back(same ? message : s.message);
      }
      if (!replaced) terms.push_back(message);
      return interval_sum(terms);
    } else {
      Sign acc = Sign::Zero;
      for (const Slot& s : slots) {
        const bool same = s.from == from && s.via == via;
        replaced = replaced || same;
        acc = sign_add(acc, same ? message : s.message);
      }
      if (!replaced) acc = sign_add(acc, message);
      return acc;
    }
  }

  std::optional<Update> prospective(const State& st, std::size_t from, std::size_t via, const Value& message) const {
    const Value sum = compose(st.slots, from, via, message);
    if constexpr (kInterval) {
      if (st.collapsed) {
        const Sign s = sign_add(st.collapsed_sign, classify(sum));
        if (s == st.collapsed_sign) return std::nullopt;
        return Update{sign_to_unit_interval(s), true, s};
      }
      if (approx_equal(sum, st.value)) return std::nullopt;
      if (m_ && st.changes + 1 >= *m_) {
        // Joined with the current sign so the collapsed value never moves
        // back down the lattice; at most one more change can follow.
        const Sign s = sign_add(classify(st.value), classify(sum));
        return Update{sign_to_unit_interval(s), true, s};
      }
      return Update{sum, false, Sign::Zero};
    } else {
      if (sum == st.value) return std::nullopt;
      return Update{sum, false, Sign::Zero};
    }
  }

  static void store(State& st, std::size_t from, std::size_t via, const Value& message) {
    for (Slot& s : st.slots)
      if (s.from == from && s.via == via) {
        s.message = message;
        return;
      }
    st.slots.push_back(Slot{from, via, message});
  }

  static bool same(const Value& a, const Value& b) {
    if constexpr (kInterval)
      return approx_equal(a, b);
    else
      return a == b;
  }

  static unsigned bit(Arrival a) { return 1u << static_cast<unsigned>(a); }

  // Returns true when `v` took a new value.
  bool deliver(std::size_t u, const EngineLink<Value>& link) {
    const std::size_t v = link.to;
    const Value message = multiply(states_[u].value, link.weight);
    ++messages_;
    State& st = states_[v];
    auto up = prospective(st, u, link.via, message);
    if (!up) return false;
    store(st, u, link.via, message);
    if (up->value != st.value) ++st.changes;
    st.value = up->value;
    if (up->collapse) {
      st.collapsed = true;
      st.collapsed_sign = up->sign;
    }
    return true;
  }

  void visit(std::size_t u, Arrival arrival) {
    trail_[u] = true;
    states_[u].arrivals |= bit(arrival);
    for (const auto& link : links_[u]) {
      if (!may_follow(arrival, link.kind)) continue;
      const std::size_t v = link.to;
      if (trail_[v] || blocked_[v]) continue;
      if (deliver(u, link)) visit(v, arrival_after(link.kind));
    }
    trail_[u] = false;
  }

  const Slot* slot(const State& st, std::size_t from, std::size_t via) const {
    for (const Slot& s : st.slots)
      if (s.from == from && s.via == via) return &s;
    return nullptr;
  }

  // With an m-bound a collapsed node stops re-sending, so a neighbour that
  // was on the trail when the node last changed may never hear its final
  // value. Deliver every such stale message, each on a fresh trail, until
  // none is left. Values only change a bounded number of times, so this
  // terminates.
  void settle() {
    for (bool again = true; again;) {
      again = false;
      for (std::size_t u = 0; u < net_.size(); ++u) {
        const State& su = states_[u];
        if (su.value == zero() || su.arrivals == 0) continue;
        for (const auto& link : links_[u]) {
          if (blocked_[link.to]) continue;
          bool admissible = false;
          for (Arrival a : {Arrival::Origin, Arrival::FromParent, Arrival::FromChild})
            admissible = admissible || ((su.arrivals & bit(a)) && may_follow(a, link.kind));
          if (!admissible) continue;
          const Value message = multiply(su.value, link.weight);
          const Slot* old = slot(states_[link.to], u, link.via);
          if (old && same(old->message, message)) continue;
          if (!old && message == zero()) continue;
          State& st = states_[link.to];
          trail_[u] = true;
          if (deliver(u, link)) {
            visit(link.to, arrival_after(link.kind));
          } else {
            store(st, u, link.via, message);
          }
          trail_[u] = false;
          again = true;
        }
      }
    }
  }

  const Network& net_;
  const LinkGraph<Value>& links_;
  std::optional<std::size_t> m_;
  std::vector<State> states_;
  std::vector<bool> blocked_;
  std::vector<bool> trail_;
  std::size_t messages_ = 0;
};

inline std::size_t observed_index(const Network& net, const Evidence& prior, const NodeId& node) {
  if (prior.contains(node)) throw PreconditionError("observed node '" + node.str() + "' is already evidence");
  for (const auto& [id, v] : prior.values) net.index(id);
  return net.index(node);
}

}  // namespace detail

/// Sign of the change in every node occasioned by observing `obs`, given the
/// earlier observations in `prior_evidence`. Arcs into quantified nodes use
/// the sign abstracted from the CPT.
inline SignResult propagate_signs(const Network& net, const Evidence& prior_evidence, const SignObservation& obs) {
  require_valid(net);
  const auto origin = detail::observed_index(net, prior_evidence, obs.node);
  Evidence evidence = prior_evidence;
  evidence.values[obs.node] = obs.sign != Sign::Negative;
  auto inter = [&](std::size_t c, std::size_t a, std::size_t b) {
    const NodeId& cid = net.id(c);
    auto it = evidence.values.find(cid);
    if (it == evidence.values.end()) return Sign::Ambiguous;
    if (cid == obs.node && obs.sign != Sign::Positive && obs.sign != Sign::Negative) return Sign::Ambiguous;
    return intercausal_sign(net, cid, it->second, net.id(a), net.id(b));
  };
  auto sign_of = [&](const Arc& a) { return arc_sign(net, a); };
  auto links = detail::build_links<Sign>(net, evidence, sign_of, sign_of, inter);
  return detail::Engine<Sign>(net, links, prior_evidence, std::nullopt).run(origin, obs.sign);
}

/// Bounds on the change in every node's probability occasioned by `obs`.
inline IntervalResult propagate_intervals(const IntervalNetwork& inet, const Evidence& prior_evidence,
                                          const Observation& obs, const PropagationConfig& config = {}) {
  const Network& net = inet.base();
  if (config.m && *config.m == 0) throw InvalidArgument("m must be at least 1");
  const auto origin = detail::observed_index(net, prior_evidence, obs.node);
  const Sign entry_class = classify(obs.strength);
  if ((obs.value && (entry_class == Sign::Negative || entry_class == Sign::Ambiguous)) ||
      (!obs.value && (entry_class == Sign::Positive || entry_class == Sign::Ambiguous)))
    throw InvalidArgument("entry interval " + to_string(obs.strength) + " contradicts the observed value of '" +
                          obs.node.str() + "'");
  Evidence evidence = prior_evidence;
  evidence.values[obs.node] = obs.value;
  auto fwd = [&](const Arc& a) { return inet.influence(a.parent, a.child).interval; };
  auto rev = [&](const Arc& a) { return inet.influence(a.child, a.parent).interval; };
  auto inter = [&](std::size_t c, std::size_t a, std::size_t b) {
    auto it = evidence.values.find(net.id(c));
    if (it == evidence.values.end()) return sign_to_unit_interval(Sign::Ambiguous);
    return inet.intercausal_interval(net.id(c), it->second, net.id(a), net.id(b));
  };
  auto links = detail::build_links<Interval>(net, evidence, fwd, rev, inter);
  return detail::Engine<Interval>(net, links, prior_evidence, config.m).run(origin, obs.strength);
}

/// Scales a maximal-effect result by the actual strength of the observation.
inline IntervalResult apply_strength(IntervalResult result, const Interval& strength) {
  for (auto& [id, v] : result.per_node) v = interval_mul(v, strength);
  return result;
}

}  // namespace sqpn
