#pragma once

// Network data model: binary nodes, signed or quantified arcs, synergy
// declarations, structural validation and evidence-aware link activity.

#include <algorithm>
#include <cstdint>
#include <compare>
#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sqpn/algebra.hpp"
#include "sqpn/error.hpp"

namespace sqpn {

inline bool is_valid_node_name(std::string_view s) noexcept {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(s.front())) return false;
  return std::all_of(s.begin(), s.end(), [&](char c) { return alpha(c) || digit(c) || c == '_'; });
}

class NodeId {
 public:
  NodeId() = default;
  explicit NodeId(std::string name) : name_(std::move(name)) {
    if (!is_valid_node_name(name_)) throw InvalidArgument("invalid node name '" + name_ + "'");
  }
  explicit NodeId(const char* name) : NodeId(std::string(name)) {}

  const std::string& str() const noexcept { return name_; }

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
  friend bool operator==(const NodeId&, const NodeId&) = default;

 private:
  std::string name_;
};

inline std::ostream& operator<<(std::ostream& os, const NodeId& id) { return os << id.str(); }

/// One boolean per parent, in canonical (NodeId-ascending) parent order.
using ParentConfig = std::vector<bool>;

/// Pr(node = true | parent configuration). Configurations are indexed in
/// ascending binary order with the first parent as the most significant bit.
class Cpt {
 public:
  Cpt() = default;

  explicit Cpt(std::vector<NodeId> parents) : parents_(std::move(parents)) {
    std::sort(parents_.begin(), parents_.end());
    if (std::adjacent_find(parents_.begin(), parents_.end()) != parents_.end())
      throw InvalidArgument("duplicate parent in CPT");
    if (parents_.size() > 24) throw InvalidArgument("too many parents for a CPT");
    values_.assign(std::size_t{1} << parents_.size(), std::nullopt);
  }

  /// Dense construction; `values` must hold one entry per configuration.
  Cpt(std::vector<NodeId> parents, const std::vector<double>& values) : Cpt(std::move(parents)) {
    if (values.size() != values_.size()) throw InvalidArgument("CPT size does not match parent count");
    for (std::size_t i = 0; i < values.size(); ++i) values_[i] = values[i];
  }

  const std::vector<NodeId>& parents() const noexcept { return parents_; }
  std::size_t size() const noexcept { return values_.size(); }

  static std::size_t index_of(const ParentConfig& config) noexcept {
    std::size_t idx = 0;
    for (bool b : config) idx = (idx << 1) | (b ? 1u : 0u);
    return idx;
  }

  static ParentConfig config_of(std::size_t index, std::size_t parent_count) {
    ParentConfig c(parent_count);
    for (std::size_t i = 0; i < parent_count; ++i) c[i] = (index >> (parent_count - 1 - i)) & 1u;
    return c;
  }

  void set(std::size_t index, double p) { values_.at(index) = p; }
  void set(const ParentConfig& config, double p) {
    if (config.size() != parents_.size()) throw InvalidArgument("configuration length does not match parent count");
    set(index_of(config), p);
  }

  std::optional<double> get(std::size_t index) const { return values_.at(index); }
  std::optional<double> get(const ParentConfig& config) const { return get(index_of(config)); }

  double at(std::size_t index) const {
    const auto& v = values_.at(index);
    if (!v) throw PreconditionError("CPT entry not specified");
    return *v;
  }

  std::size_t specified() const noexcept {
    return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), [](auto& v) { return v.has_value(); }));
  }
  bool complete() const noexcept { return specified() == values_.size(); }

  friend bool operator==(const Cpt&, const Cpt&) = default;

 private:
  std::vector<NodeId> parents_;
  std::vector<std::optional<double>> values_{std::nullopt};
};

struct Node {
  NodeId id;
  std::optional<double> prior;  ///< Pr(node = true), for root nodes
  std::optional<Cpt> cpt;

  friend bool operator==(const Node&, const Node&) = default;
};

struct Arc {
  NodeId parent;
  NodeId child;
  std::optional<Sign> sign;

  friend bool operator==(const Arc&, const Arc&) = default;
};

/// Sign of the intercausal influence between two parents of `child`, induced
/// once `child` is observed to have `observed_value`.
struct SynergyDecl {
  NodeId child;
  bool observed_value = true;
  NodeId first;   ///< first < second
  NodeId second;
  Sign sign = Sign::Ambiguous;

  friend bool operator==(const SynergyDecl&, const SynergyDecl&) = default;
};

/// An interval influence fixed by hand, overriding whatever would be derived
/// for the ordered pair (source, target). The pair must be an arc in either
/// direction.
struct PinnedInfluence {
  NodeId source;
  NodeId target;
  Interval interval;

  friend bool operator==(const PinnedInfluence&, const PinnedInfluence&) = default;
};

struct Evidence {
  std::map<NodeId, bool> values;

  bool contains(const NodeId& id) const { return values.count(id) != 0; }
  friend bool operator==(const Evidence&, const Evidence&) = default;
};

/// Acyclic digraph of binary nodes. Structural impossibilities (duplicate ids,
/// references to unknown nodes, self loops, duplicate arcs) are rejected on
/// insertion; every other invariant is reported by validate().
class Network {
 public:
  std::string name = "network";

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<Arc>& arcs() const noexcept { return arcs_; }
  const std::vector<SynergyDecl>& synergies() const noexcept { return synergies_; }
  const std::vector<PinnedInfluence>& pins() const noexcept { return pins_; }

  std::optional<std::size_t> find(const NodeId& id) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id, [](const Node& n, const NodeId& k) { return n.id < k; });
    if (it == nodes_.end() || it->id != id) return std::nullopt;
    return static_cast<std::size_t>(it - nodes_.begin());
  }
  bool contains(const NodeId& id) const { return find(id).has_value(); }

  std::size_t index(const NodeId& id) const {
    auto i = find(id);
    if (!i) throw InvalidArgument("unknown node '" + id.str() + "'");
    return *i;
  }

  const Node& node(std::size_t i) const { return nodes_.at(i); }
  const Node& node(const NodeId& id) const { return nodes_[index(id)]; }
  const NodeId& id(std::size_t i) const { return nodes_.at(i).id; }

  /// Ascending index order, which is also canonical NodeId order.
  const std::vector<std::size_t>& parents(std::size_t i) const { return parents_.at(i); }
  const std::vector<std::size_t>& children(std::size_t i) const { return children_.at(i); }

  std::vector<NodeId> parent_ids(const NodeId& id) const {
    std::vector<NodeId> out;
    for (auto p : parents(index(id))) out.push_back(nodes_[p].id);
    return out;
  }

  const Arc* arc(const NodeId& parent, const NodeId& child) const {
    auto it = std::find_if(arcs_.begin(), arcs_.end(), [&](const Arc& a) { return a.parent == parent && a.child == child; });
    return it == arcs_.end() ? nullptr : &*it;
  }

  Network& add_node(NodeId id, std::optional<double> prior = std::nullopt) {
    if (contains(id)) throw InvalidArgument("duplicate node '" + id.str() + "'");
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id, [](const Node& n, const NodeId& k) { return n.id < k; });
    nodes_.insert(it, Node{std::move(id), prior, std::nullopt});
    rebuild();
    return *this;
  }

  Network& add_arc(const NodeId& parent, const NodeId& child, std::optional<Sign> sign = std::nullopt) {
    index(parent);
    index(child);
    if (parent == child) throw InvalidArgument("self loop on '" + parent.str() + "'");
    if (arc(parent, child)) throw InvalidArgument("duplicate arc " + parent.str() + " -> " + child.str());
    Arc a{parent, child, sign};
    auto it = std::lower_bound(arcs_.begin(), arcs_.end(), a, arc_less);
    arcs_.insert(it, std::move(a));
    rebuild();
    return *this;
  }

  Network& remove_arc(const NodeId& parent, const NodeId& child) {
    auto it = std::find_if(arcs_.begin(), arcs_.end(), [&](const Arc& a) { return a.parent == parent && a.child == child; });
    if (it == arcs_.end()) throw InvalidArgument("no arc " + parent.str() + " -> " + child.str());
    arcs_.erase(it);
    std::erase_if(pins_, [&](const PinnedInfluence& p) {
      return (p.source == parent && p.target == child) || (p.source == child && p.target == parent);
    });
    rebuild();
    return *this;
  }

  /// Removes the node with its arcs, synergies and pins. CPTs of former
  /// children are left untouched.
  Network& remove_node(const NodeId& id) {
    nodes_.erase(nodes_.begin() + static_cast<std::ptrdiff_t>(index(id)));
    std::erase_if(arcs_, [&](const Arc& a) { return a.parent == id || a.child == id; });
    std::erase_if(synergies_, [&](const SynergyDecl& s) { return s.child == id || s.first == id || s.second == id; });
    std::erase_if(pins_, [&](const PinnedInfluence& p) { return p.source == id || p.target == id; });
    rebuild();
    return *this;
  }

  Network& set_arc_sign(const NodeId& parent, const NodeId& child, std::optional<Sign> sign) {
    auto it = std::find_if(arcs_.begin(), arcs_.end(), [&](const Arc& a) { return a.parent == parent && a.child == child; });
    if (it == arcs_.end()) throw InvalidArgument("no arc " + parent.str() + " -> " + child.str());
    it->sign = sign;
    return *this;
  }

  Network& set_prior(const NodeId& id, std::optional<double> prior) {
    nodes_[index(id)].prior = prior;
    return *this;
  }

  Network& set_cpt(const NodeId& id, std::optional<Cpt> cpt) {
    nodes_[index(id)].cpt = std::move(cpt);
    return *this;
  }

  Network& add_synergy(SynergyDecl s) {
    index(s.child);
    index(s.first);
    index(s.second);
    if (s.first == s.second) throw InvalidArgument("synergy needs two distinct parents");
    if (s.second < s.first) std::swap(s.first, s.second);
    for (const auto& o : synergies_)
      if (o.child == s.child && o.observed_value == s.observed_value && o.first == s.first && o.second == s.second)
        throw InvalidArgument("duplicate synergy on '" + s.child.str() + "'");
    synergies_.push_back(std::move(s));
    std::sort(synergies_.begin(), synergies_.end(), [](const SynergyDecl& a, const SynergyDecl& b) {
      return std::tie(a.child, a.observed_value, a.first, a.second) < std::tie(b.child, b.observed_value, b.first, b.second);
    });
    return *this;
  }

  Network& remove_synergies(const NodeId& child) {
    std::erase_if(synergies_, [&](const SynergyDecl& s) { return s.child == child; });
    return *this;
  }

  Network& pin(PinnedInfluence p) {
    index(p.source);
    index(p.target);
    std::erase_if(pins_, [&](const PinnedInfluence& o) { return o.source == p.source && o.target == p.target; });
    pins_.push_back(std::move(p));
    std::sort(pins_.begin(), pins_.end(), [](const PinnedInfluence& a, const PinnedInfluence& b) {
      return std::tie(a.source, a.target) < std::tie(b.source, b.target);
    });
    return *this;
  }

  const SynergyDecl* synergy(const NodeId& child, bool value, NodeId a, NodeId b) const {
    if (b < a) std::swap(a, b);
    for (const auto& s : synergies_)
      if (s.child == child && s.observed_value == value && s.first == a && s.second == b) return &s;
    return nullptr;
  }

  /// A node is quantified when it is a root with a prior, or it carries a
  /// complete CPT over exactly its parents.
  bool quantified(std::size_t i) const {
    const Node& n = nodes_.at(i);
    if (n.cpt) return n.cpt->complete() && cpt_matches_parents(i);
    return n.prior.has_value() && parents_[i].empty();
  }

  bool has_cpt(std::size_t i) const { return nodes_.at(i).cpt.has_value() && !parents_.at(i).empty(); }

  bool fully_quantified() const {
    for (std::size_t i = 0; i < size(); ++i)
      if (!quantified(i)) return false;
    return true;
  }

  /// Dense Pr(node = true | parents) over parents(i), canonical order.
  std::vector<double> table(std::size_t i) const {
    if (!quantified(i)) throw PreconditionError("node '" + id(i).str() + "' is not quantified");
    const Node& n = nodes_[i];
    if (!n.cpt) return {*n.prior};
    std::vector<double> out(n.cpt->size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = n.cpt->at(k);
    return out;
  }

  bool cpt_matches_parents(std::size_t i) const {
    const Node& n = nodes_.at(i);
    if (!n.cpt) return false;
    const auto& ps = n.cpt->parents();
    if (ps.size() != parents_[i].size()) return false;
    for (std::size_t k = 0; k < ps.size(); ++k)
      if (ps[k] != nodes_[parents_[i][k]].id) return false;
    return true;
  }

  friend bool operator==(const Network& a, const Network& b) {
    return a.name == b.name && a.nodes_ == b.nodes_ && a.arcs_ == b.arcs_ && a.synergies_ == b.synergies_ && a.pins_ == b.pins_;
  }

 private:
  static bool arc_less(const Arc& a, const Arc& b) { return std::tie(a.parent, a.child) < std::tie(b.parent, b.child); }

  void rebuild() {
    parents_.assign(nodes_.size(), {});
    children_.assign(nodes_.size(), {});
    for (const Arc& a : arcs_) {
      auto p = find(a.parent), c = find(a.child);
      if (!p || !c) continue;
      parents_[*c].push_back(*p);
      children_[*p].push_back(*c);
    }
    for (auto& v : parents_) std::sort(v.begin(), v.end());
    for (auto& v : children_) std::sort(v.begin(), v.end());
  }

  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::vector<SynergyDecl> synergies_;
  std::vector<PinnedInfluence> pins_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
};

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  Cycle,
  IncompleteCpt,
  CptParentMismatch,
  ProbabilityOutOfRange,
  PriorAndCpt,
  PriorOnNonRoot,
  SignOnQuantifiedNode,
  MissingSign,
  SynergyNotParents,
  PinWithoutArc,
};

inline std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::Cycle: return "cycle";
    case ViolationKind::IncompleteCpt: return "incomplete CPT";
    case ViolationKind::CptParentMismatch: return "CPT parents do not match arcs";
    case ViolationKind::ProbabilityOutOfRange: return "probability out of range";
    case ViolationKind::PriorAndCpt: return "both prior and CPT";
    case ViolationKind::PriorOnNonRoot: return "prior on non-root node";
    case ViolationKind::SignOnQuantifiedNode: return "sign on quantified node";
    case ViolationKind::MissingSign: return "missing sign";
    case ViolationKind::SynergyNotParents: return "synergy pair not parents of child";
    case ViolationKind::PinWithoutArc: return "pinned influence without arc";
  }
  return "violation";
}

struct Violation {
  ViolationKind kind;
  std::string message;
  std::vector<NodeId> nodes;  ///< offending nodes; for arcs, (parent, child)
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool valid() const noexcept { return violations.empty(); }
};

class ValidationError : public Error {
 public:
  explicit ValidationError(ValidationReport report)
      : Error(report.violations.empty() ? std::string("invalid network") : report.violations.front().message),
        report_(std::move(report)) {}
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

namespace detail {

/// Some directed cycle as a closed node sequence, or empty when acyclic.
inline std::vector<std::size_t> find_cycle(const Network& net) {
  const std::size_t n = net.size();
  std::vector<int> color(n, 0);
  std::vector<std::size_t> stack;
  std::vector<std::size_t> cycle;
  auto dfs = [&](auto&& self, std::size_t u) -> bool {
    color[u] = 1;
    stack.push_back(u);
    for (auto v : net.children(u)) {
      if (color[v] == 1) {
        auto it = std::find(stack.begin(), stack.end(), v);
        cycle.assign(it, stack.end());
        cycle.push_back(v);
        return true;
      }
      if (color[v] == 0 && self(self, v)) return true;
    }
    stack.pop_back();
    color[u] = 2;
    return false;
  };
  for (std::size_t u = 0; u < n; ++u)
    if (color[u] == 0 && dfs(dfs, u)) return cycle;
  return {};
}

inline bool probability_ok(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace detail

inline ValidationReport validate(const Network& net) {
  ValidationReport r;
  auto add = [&](ViolationKind k, std::string msg, std::vector<NodeId> nodes) {
    r.violations.push_back(Violation{k, std::move(msg), std::move(nodes)});
  };

  if (auto cyc = detail::find_cycle(net); !cyc.empty()) {
    std::string msg;
    std::vector<NodeId> ids;
    for (std::size_t k = 0; k < cyc.size(); ++k) {
      if (k) msg += " -> ";
      msg += net.id(cyc[k]).str();
      ids.push_back(net.id(cyc[k]));
    }
    add(ViolationKind::Cycle, "cycle: " + msg, ids);
  }

  for (std::size_t i = 0; i < net.size(); ++i) {
    const Node& n = net.node(i);
    const auto& ps = net.parents(i);
    if (n.prior && !detail::probability_ok(*n.prior))
      add(ViolationKind::ProbabilityOutOfRange, "prior of " + n.id.str() + " is outside [0, 1]", {n.id});
    if (n.prior && n.cpt) add(ViolationKind::PriorAndCpt, n.id.str() + " has both a prior and a CPT", {n.id});
    if (n.prior && !ps.empty()) add(ViolationKind::PriorOnNonRoot, n.id.str() + " has a prior but also parents", {n.id});
    if (n.cpt) {
      if (!net.cpt_matches_parents(i)) {
        add(ViolationKind::CptParentMismatch, "CPT of " + n.id.str() + " is not over its parents", {n.id});
      } else if (!n.cpt->complete()) {
        add(ViolationKind::IncompleteCpt,
            "incomplete CPT for " + n.id.str() + ": " + std::to_string(n.cpt->specified()) + " of " +
                std::to_string(n.cpt->size()) + " configurations",
            {n.id});
      }
      for (std::size_t k = 0; k < n.cpt->size(); ++k) {
        auto v = n.cpt->get(k);
        if (v && !detail::probability_ok(*v)) {
          add(ViolationKind::ProbabilityOutOfRange, "CPT entry of " + n.id.str() + " is outside [0, 1]", {n.id});
          break;
        }
      }
    }
    // Either a CPT for the node, or a sign on every incoming arc.
    for (auto p : ps) {
      const Arc* a = net.arc(net.id(p), n.id);
      if (n.cpt && a->sign)
        add(ViolationKind::SignOnQuantifiedNode, "sign on quantified node: " + a->parent.str() + " -> " + a->child.str(),
            {a->parent, a->child});
      if (!n.cpt && !a->sign)
        add(ViolationKind::MissingSign, "missing sign: " + a->parent.str() + " -> " + a->child.str(), {a->parent, a->child});
    }
  }

  for (const auto& s : net.synergies()) {
    if (!net.arc(s.first, s.child) || !net.arc(s.second, s.child))
      add(ViolationKind::SynergyNotParents,
          "synergy on " + s.child.str() + ": " + s.first.str() + " and " + s.second.str() + " are not both parents",
          {s.child, s.first, s.second});
  }
  for (const auto& p : net.pins()) {
    if (!net.arc(p.source, p.target) && !net.arc(p.target, p.source))
      add(ViolationKind::PinWithoutArc, "pinned influence " + p.source.str() + " -> " + p.target.str() + " has no arc",
          {p.source, p.target});
  }
  return r;
}

inline void require_valid(const Network& net) {
  auto r = validate(net);
  if (!r.valid()) throw ValidationError(std::move(r));
}

// ---------------------------------------------------------------------------
// Ordering

/// Kahn's algorithm; ties broken by ascending NodeId.
inline std::vector<std::size_t> topo_indices(const Network& net) {
  const std::size_t n = net.size();
  std::vector<std::size_t> indeg(n);
  for (std::size_t i = 0; i < n; ++i) indeg[i] = net.parents(i).size();
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) ready.push(i);
  std::vector<std::size_t> out;
  out.reserve(n);
  while (!ready.empty()) {
    auto u = ready.top();
    ready.pop();
    out.push_back(u);
    for (auto v : net.children(u))
      if (--indeg[v] == 0) ready.push(v);
  }
  if (out.size() != n) throw PreconditionError("cycle detected");
  return out;
}

inline std::vector<NodeId> topo_order(const Network& net) {
  std::vector<NodeId> out;
  for (auto i : topo_indices(net)) out.push_back(net.id(i));
  return out;
}

/// True when `to` is reachable from `from` along directed arcs (from != to).
inline bool has_directed_path(const Network& net, std::size_t from, std::size_t to,
                              std::optional<std::pair<std::size_t, std::size_t>> skip_arc = std::nullopt) {
  std::vector<bool> seen(net.size(), false);
  std::vector<std::size_t> stack{from};
  seen[from] = true;
  while (!stack.empty()) {
    auto u = stack.back();
    stack.pop_back();
    for (auto v : net.children(u)) {
      if (skip_arc && skip_arc->first == u && skip_arc->second == v) continue;
      if (v == to) return true;
      if (!seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Link activity

enum class LinkKind { Forward, Reverse, Intercausal };

/// A directed link usable for message passing. Forward follows an arc,
/// Reverse goes against one, Intercausal connects two parents of `via`.
struct Link {
  NodeId from;
  NodeId to;
  LinkKind kind;
  std::optional<NodeId> via;
  Sign sign;

  friend bool operator==(const Link&, const Link&) = default;
};

/// Nodes that open a converging connection: evidence nodes and nodes with an
/// evidence descendant.
inline std::vector<bool> opened_nodes(const Network& net, const Evidence& evidence) {
  std::vector<bool> open(net.size(), false);
  std::vector<std::size_t> stack;
  for (const auto& [id, v] : evidence.values) {
    auto i = net.index(id);
    if (!open[i]) {
      open[i] = true;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    auto u = stack.back();
    stack.pop_back();
    for (auto p : net.parents(u))
      if (!open[p]) {
        open[p] = true;
        stack.push_back(p);
      }
  }
  return open;
}

/// Sign of the arc as given in the network (for unquantified children).
/// Quantified arcs are reported '?' here; the abstraction layer supplies
/// CPT-derived signs.
inline Sign declared_arc_sign(const Arc& a) { return a.sign.value_or(Sign::Ambiguous); }

/// Sign of an intercausal link between parents a and b of `via` given the
/// evidence: the declared synergy for the observed value, '?' when undeclared
/// or when `via` is opened only through a descendant.
inline Sign declared_intercausal_sign(const Network& net, const Evidence& evidence, const NodeId& via, const NodeId& a,
                                      const NodeId& b) {
  auto it = evidence.values.find(via);
  if (it == evidence.values.end()) return Sign::Ambiguous;
  if (const SynergyDecl* s = net.synergy(via, it->second, a, b)) return s->sign;
  return Sign::Ambiguous;
}

/// Every link whose target may receive a message under `evidence`. Whether a
/// link is usable on a particular trail further depends on how the trail
/// entered its source (see may_follow).
template <class ArcSignFn, class SynergySignFn>
std::vector<Link> active_links(const Network& net, const Evidence& evidence, ArcSignFn arc_sign, SynergySignFn synergy_sign) {
  std::vector<Link> out;
  auto blocked = [&](const NodeId& id) { return evidence.contains(id); };
  for (const Arc& a : net.arcs()) {
    Sign s = arc_sign(a);
    if (!blocked(a.child)) out.push_back(Link{a.parent, a.child, LinkKind::Forward, std::nullopt, s});
    if (!blocked(a.parent)) out.push_back(Link{a.child, a.parent, LinkKind::Reverse, std::nullopt, s});
  }
  auto open = opened_nodes(net, evidence);
  for (std::size_t c = 0; c < net.size(); ++c) {
    if (!open[c]) continue;
    const auto& ps = net.parents(c);
    for (std::size_t x = 0; x < ps.size(); ++x)
      for (std::size_t y = x + 1; y < ps.size(); ++y) {
        const NodeId& a = net.id(ps[x]);
        const NodeId& b = net.id(ps[y]);
        Sign s = synergy_sign(net.id(c), a, b);
        if (!blocked(b)) out.push_back(Link{a, b, LinkKind::Intercausal, net.id(c), s});
        if (!blocked(a)) out.push_back(Link{b, a, LinkKind::Intercausal, net.id(c), s});
      }
  }
  std::sort(out.begin(), out.end(), [](const Link& l, const Link& r) {
    return std::tie(l.from, l.to, l.kind, l.via) < std::tie(r.from, r.to, r.kind, r.via);
  });
  return out;
}

inline std::vector<Link> active_links(const Network& net, const Evidence& evidence) {
  return active_links(
      net, evidence, [](const Arc& a) { return declared_arc_sign(a); },
      [&](const NodeId& via, const NodeId& a, const NodeId& b) { return declared_intercausal_sign(net, evidence, via, a, b); });
}

/// How a trail entered a node.
enum class Arrival { Origin, FromParent, FromChild };

/// Trail continuation rule: a trail that came down into a node may not go up
/// to another parent through it (converging connection); that case is covered
/// by intercausal links from the parent side. Every other continuation is
/// serial or diverging through an unobserved node and stays open.
constexpr bool may_follow(Arrival arrival, LinkKind next) noexcept {
  return !(arrival == Arrival::FromParent && next == LinkKind::Reverse);
}

constexpr Arrival arrival_after(LinkKind k) noexcept {
  return k == LinkKind::Forward ? Arrival::FromParent : Arrival::FromChild;
}

/// Nodes d-connected to `source` given `evidence` (source and evidence
/// excluded), computed by reachability over (node, arrival) states along
/// active links.
inline std::set<NodeId> reachable(const Network& net, const Evidence& evidence, const NodeId& source) {
  auto links = active_links(net, evidence);
  std::map<NodeId, std::vector<const Link*>> out;
  for (const auto& l : links) out[l.from].push_back(&l);

  std::set<std::pair<NodeId, Arrival>> seen;
  std::deque<std::pair<NodeId, Arrival>> queue{{source, Arrival::Origin}};
  seen.insert(queue.front());
  std::set<NodeId> result;
  while (!queue.empty()) {
    auto [u, arr] = queue.front();
    queue.pop_front();
    for (const Link* l : out[u]) {
      if (!may_follow(arr, l->kind) || l->to == source) continue;
      std::pair<NodeId, Arrival> next{l->to, arrival_after(l->kind)};
      result.insert(l->to);
      if (seen.insert(next).second) queue.push_back(next);
    }
  }
  return result;
}

}  // namespace sqpn
