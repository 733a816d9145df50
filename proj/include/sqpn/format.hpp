#pragma once

// The .sqpn text format and the tab-separated report tables.
//
//   network <name>
//   node <id> [prior=<p>]
//   arc <parent> -> <child> [sign=<+|-|0|?>]
//   cpt <child> | <parent,...> { <config>=<p>; ... }
//   synergy <child>=<true|false> (<p1>,<p2>) sign=<+|-|0|?>
//   interval <source> -> <target> [<lo>, <hi>]
//
// A config lists every parent once, negated with '!', e.g. "A,!C". Node ids
// are case-sensitive. A root CPT "cpt A | { =0.3 }" is read as a prior.
// '#' starts a comment that runs to the end of the line.

#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "sqpn/algebra.hpp"
#include "sqpn/error.hpp"
#include "sqpn/model.hpp"
#include "sqpn/propagate.hpp"

namespace sqpn {

struct SourcePos {
  std::size_t line = 1;
  std::size_t column = 1;
};

struct Diagnostic {
  SourcePos pos;
  std::string message;
  bool warning = false;
};

inline std::string to_string(const Diagnostic& d) {
  return std::to_string(d.pos.line) + ":" + std::to_string(d.pos.column) + ": " + (d.warning ? "warning: " : "error: ") +
         d.message;
}

class ParseError : public Error {
 public:
  explicit ParseError(std::vector<Diagnostic> diagnostics)
      : Error(diagnostics.empty() ? std::string("parse error") : to_string(diagnostics.front())),
        diagnostics_(std::move(diagnostics)) {}
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

struct ParseOptions {
  /// Drop signs on arcs into quantified nodes, with a warning, instead of
  /// rejecting the file.
  bool lenient = false;
};

/// Shortest decimal text that reads back as the same double.
inline std::string format_exact(double v) {
  if (v == 0.0) v = 0.0;
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw InvalidArgument("number not representable");
  return std::string(buf, end);
}

namespace detail {

inline const std::set<std::string, std::less<>>& keywords() {
  static const std::set<std::string, std::less<>> k{"network", "node", "arc", "cpt", "synergy", "interval",
                                                    "prior", "sign", "true", "false"};
  return k;
}

class Parser {
 public:
  Parser(std::string_view text, const ParseOptions& opts) : text_(text), opts_(opts) {}

  Network run(std::vector<Diagnostic>* warnings) {
    skip_space();
    if (at_end()) fail(pos(), "no network declared");
    while (true) {
      skip_space();
      if (at_end()) break;
      statement();
    }
    check_semantics();
    if (warnings) *warnings = warnings_;
    return std::move(net_);
  }

 private:
  struct Located {
    SourcePos pos;
  };

  [[noreturn]] void fail(SourcePos p, std::string msg) { throw ParseError({Diagnostic{p, std::move(msg), false}}); }

  bool at_end() const { return i_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[i_]; }
  SourcePos pos() const { return {line_, col_}; }

  void advance() {
    if (text_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  void skip_space() {
    while (!at_end()) {
      const char c = peek();
      if (c == '#') {
        while (!at_end() && peek() != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  static bool word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  }

  std::string word() {
    skip_space();
    const auto start = i_;
    while (!at_end() && word_char(peek())) advance();
    return std::string(text_.substr(start, i_ - start));
  }

  void expect(std::string_view tok) {
    skip_space();
    const SourcePos p = pos();
    if (text_.substr(i_, tok.size()) != tok) fail(p, "expected '" + std::string(tok) + "'");
    for (std::size_t k = 0; k < tok.size(); ++k) advance();
  }

  bool accept(std::string_view tok) {
    skip_space();
    if (text_.substr(i_, tok.size()) != tok) return false;
    for (std::size_t k = 0; k < tok.size(); ++k) advance();
    return true;
  }

  /// Looks ahead for `key=` without consuming anything else.
  bool accept_key(std::string_view key) {
    skip_space();
    const auto save_i = i_;
    const auto save_l = line_, save_c = col_;
    if (word() == key && accept("=")) return true;
    i_ = save_i;
    line_ = save_l;
    col_ = save_c;
    return false;
  }

  NodeId node_id(bool must_exist = true) {
    skip_space();
    const SourcePos p = pos();
    const std::string w = word();
    if (w.empty()) fail(p, "expected a node id");
    if (keywords().count(w)) fail(p, "'" + w + "' is a reserved word");
    if (!is_valid_node_name(w)) fail(p, "invalid node id '" + w + "'");
    NodeId id(w);
    if (must_exist && !net_.contains(id)) fail(p, "unknown node '" + w + "'");
    return id;
  }

  double number() {
    skip_space();
    const SourcePos p = pos();
    const auto start = i_;
    while (!at_end() && (word_char(peek()) || peek() == '.' || peek() == '-' || peek() == '+')) advance();
    const auto tok = text_.substr(start, i_ - start);
    double v = 0.0;
    auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || end != tok.data() + tok.size()) fail(p, "expected a number");
    return v;
  }

  double probability() {
    skip_space();
    const SourcePos p = pos();
    const double v = number();
    if (!(v >= 0.0 && v <= 1.0)) fail(p, "probability " + format_exact(v) + " is outside [0, 1]");
    return v;
  }

  Sign sign() {
    skip_space();
    const SourcePos p = pos();
    auto s = sign_from_char(peek());
    if (!s) fail(p, "expected a sign (+, -, 0 or ?)");
    advance();
    return *s;
  }

  bool boolean() {
    skip_space();
    const SourcePos p = pos();
    const std::string w = word();
    if (w == "true") return true;
    if (w == "false") return false;
    fail(p, "expected 'true' or 'false'");
  }

  void statement() {
    const SourcePos p = pos();
    const std::string kw = word();
    if (kw.empty()) fail(p, std::string("unexpected character '") + peek() + "'");
    if (kw != "network" && !seen_header_) fail(p, "no network declared");
    if (kw == "network") {
      if (seen_header_) fail(p, "duplicate network declaration");
      seen_header_ = true;
      skip_space();
      const SourcePos q = pos();
      const std::string name = word();
      if (name.empty()) fail(q, "expected a network name");
      net_.name = name;
    } else if (kw == "node") {
      NodeId id = node_id(false);
      if (net_.contains(id)) fail(p, "duplicate node '" + id.str() + "'");
      std::optional<double> prior;
      if (accept_key("prior")) prior = probability();
      net_.add_node(id, prior);
      node_pos_[id] = p;
    } else if (kw == "arc") {
      NodeId a = node_id();
      expect("->");
      NodeId b = node_id();
      std::optional<Sign> s;
      if (accept_key("sign")) s = sign();
      if (a == b) fail(p, "self loop on '" + a.str() + "'");
      if (net_.arc(a, b)) fail(p, "duplicate arc " + a.str() + " -> " + b.str());
      net_.add_arc(a, b, s);
      arc_pos_[{a, b}] = p;
    } else if (kw == "cpt") {
      cpt(p);
    } else if (kw == "synergy") {
      NodeId child = node_id();
      expect("=");
      const bool value = boolean();
      expect("(");
      NodeId x = node_id();
      expect(",");
      NodeId y = node_id();
      expect(")");
      if (!accept_key("sign")) fail(pos(), "expected 'sign='");
      const Sign s = sign();
      if (x == y) fail(p, "synergy needs two distinct parents");
      if (net_.synergy(child, value, x, y)) fail(p, "duplicate synergy on '" + child.str() + "'");
      net_.add_synergy(SynergyDecl{child, value, x, y, s});
      synergy_pos_[child] = p;
    } else if (kw == "interval") {
      NodeId a = node_id();
      expect("->");
      NodeId b = node_id();
      expect("[");
      const SourcePos q = pos();
      const double lo = number();
      expect(",");
      const double hi = number();
      expect("]");
      if (!(lo >= -1.0 && lo <= hi && hi <= 1.0)) fail(q, "interval is not a subinterval of [-1, 1]");
      for (const auto& pin : net_.pins())
        if (pin.source == a && pin.target == b) fail(p, "duplicate interval " + a.str() + " -> " + b.str());
      net_.pin(PinnedInfluence{a, b, Interval{lo, hi}});
      pin_pos_[{a, b}] = p;
    } else {
      fail(p, "unknown statement '" + kw + "'");
    }
  }

  void cpt(SourcePos p) {
    NodeId child = node_id();
    if (cpt_pos_.count(child)) fail(p, "duplicate CPT for '" + child.str() + "'");
    cpt_pos_[child] = p;
    expect("|");
    std::vector<NodeId> parents;
    skip_space();
    if (peek() != '{') {
      parents.push_back(node_id());
      while (accept(",")) parents.push_back(node_id());
    }
    Cpt table;
    try {
      table = Cpt(parents);
    } catch (const Error& e) {
      fail(p, e.what());
    }
    expect("{");
    while (true) {
      skip_space();
      if (accept("}")) break;
      const SourcePos q = pos();
      ParentConfig config(table.parents().size());
      std::vector<bool> seen(config.size(), false);
      skip_space();
      if (peek() != '=') {
        do {
          const bool negated = accept("!");
          skip_space();
          const SourcePos r = pos();
          NodeId id = node_id(false);
          auto it = std::find(table.parents().begin(), table.parents().end(), id);
          if (it == table.parents().end()) fail(r, "'" + id.str() + "' is not listed as a parent in this CPT");
          const auto k = static_cast<std::size_t>(it - table.parents().begin());
          if (seen[k]) fail(r, "'" + id.str() + "' appears twice in a configuration");
          seen[k] = true;
          config[k] = !negated;
        } while (accept(","));
      }
      if (std::find(seen.begin(), seen.end(), false) != seen.end()) fail(q, "configuration must assign every parent");
      expect("=");
      const double v = probability();
      if (table.get(config)) fail(q, "configuration given twice");
      table.set(config, v);
      skip_space();
      if (accept(";")) continue;
      if (accept("}")) break;
      fail(pos(), "expected ';' or '}'");
    }
    if (parents.empty()) {
      if (net_.node(child).prior) fail(p, "'" + child.str() + "' already has a prior");
      net_.set_prior(child, table.get(std::size_t{0}));
    } else {
      net_.set_cpt(child, std::move(table));
    }
  }

  SourcePos locate(const Violation& v) const {
    auto node_at = [&](const NodeId& id) {
      if (auto it = cpt_pos_.find(id); it != cpt_pos_.end()) return it->second;
      if (auto it = node_pos_.find(id); it != node_pos_.end()) return it->second;
      return SourcePos{};
    };
    switch (v.kind) {
      case ViolationKind::SignOnQuantifiedNode:
      case ViolationKind::MissingSign:
        if (auto it = arc_pos_.find({v.nodes.at(0), v.nodes.at(1)}); it != arc_pos_.end()) return it->second;
        break;
      case ViolationKind::PinWithoutArc:
        if (auto it = pin_pos_.find({v.nodes.at(0), v.nodes.at(1)}); it != pin_pos_.end()) return it->second;
        break;
      case ViolationKind::SynergyNotParents:
        if (auto it = synergy_pos_.find(v.nodes.at(0)); it != synergy_pos_.end()) return it->second;
        break;
      case ViolationKind::Cycle:
        if (v.nodes.size() >= 2)
          if (auto it = arc_pos_.find({v.nodes[0], v.nodes[1]}); it != arc_pos_.end()) return it->second;
        break;
      default:
        break;
    }
    return v.nodes.empty() ? SourcePos{} : node_at(v.nodes.front());
  }

  void check_semantics() {
    if (opts_.lenient) {
      for (std::size_t i = 0; i < net_.size(); ++i) {
        if (!net_.node(i).cpt) continue;
        for (auto par : net_.parents(i)) {
          const Arc* a = net_.arc(net_.id(par), net_.id(i));
          if (!a->sign) continue;
          warnings_.push_back(Diagnostic{arc_pos_.at({a->parent, a->child}),
                                         "sign on quantified node ignored: " + a->parent.str() + " -> " + a->child.str(),
                                         true});
          net_.set_arc_sign(a->parent, a->child, std::nullopt);
        }
      }
    }
    auto report = validate(net_);
    if (report.valid()) return;
    std::vector<Diagnostic> out;
    for (const auto& v : report.violations) out.push_back(Diagnostic{locate(v), v.message, false});
    std::stable_sort(out.begin(), out.end(), [](const Diagnostic& a, const Diagnostic& b) {
      return std::tie(a.pos.line, a.pos.column) < std::tie(b.pos.line, b.pos.column);
    });
    throw ParseError(std::move(out));
  }

  std::string_view text_;
  ParseOptions opts_;
  std::size_t i_ = 0, line_ = 1, col_ = 1;
  bool seen_header_ = false;
  Network net_;
  std::vector<Diagnostic> warnings_;
  std::map<NodeId, SourcePos> node_pos_, cpt_pos_, synergy_pos_;
  std::map<std::pair<NodeId, NodeId>, SourcePos> arc_pos_, pin_pos_;
};

}  // namespace detail

/// Parses and validates a network. Throws ParseError carrying positioned
/// diagnostics; warnings (lenient mode) go to `warnings` when given.
inline Network parse_network(std::string_view text, const ParseOptions& opts = {},
                             std::vector<Diagnostic>* warnings = nullptr) {
  return detail::Parser(text, opts).run(warnings);
}

inline std::string serialize_network(const Network& net) {
  std::ostringstream os;
  os << "network " << net.name << '\n';
  for (const Node& n : net.nodes()) {
    os << "node " << n.id;
    if (n.prior) os << " prior=" << format_exact(*n.prior);
    os << '\n';
  }
  for (const Arc& a : net.arcs()) {
    os << "arc " << a.parent << " -> " << a.child;
    if (a.sign) os << " sign=" << sign_char(*a.sign);
    os << '\n';
  }
  for (const Node& n : net.nodes()) {
    if (!n.cpt || n.cpt->parents().empty()) continue;
    const auto& ps = n.cpt->parents();
    os << "cpt " << n.id << " |";
    for (std::size_t k = 0; k < ps.size(); ++k) os << (k ? "," : " ") << ps[k];
    os << " {";
    bool first = true;
    for (std::size_t idx = 0; idx < n.cpt->size(); ++idx) {
      auto v = n.cpt->get(idx);
      if (!v) continue;
      const auto cfg = Cpt::config_of(idx, ps.size());
      os << (first ? " " : "; ");
      first = false;
      for (std::size_t k = 0; k < ps.size(); ++k) os << (k ? "," : "") << (cfg[k] ? "" : "!") << ps[k];
      os << '=' << format_exact(*v);
    }
    os << " }\n";
  }
  for (const auto& s : net.synergies())
    os << "synergy " << s.child << '=' << (s.observed_value ? "true" : "false") << " (" << s.first << ',' << s.second
       << ") sign=" << sign_char(s.sign) << '\n';
  for (const auto& p : net.pins())
    os << "interval " << p.source << " -> " << p.target << " [" << format_exact(p.interval.lo()) << ", "
       << format_exact(p.interval.hi()) << "]\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Report tables

namespace detail {

inline int sign_rank(Sign s) {
  switch (s) {
    case Sign::Positive: return 0;
    case Sign::Negative: return 1;
    case Sign::Zero: return 2;
    case Sign::Ambiguous: return 3;
  }
  return 4;
}

inline std::string join(const std::vector<NodeId>& ids) {
  std::string out;
  for (std::size_t k = 0; k < ids.size(); ++k) out += (k ? ", " : "") + ids[k].str();
  return out;
}

}  // namespace detail

/// Nodes sharing a sign are grouped; groups in the order +, -, 0, ?.
inline std::string render_sign_table(const std::map<NodeId, Sign>& per_node) {
  std::map<int, std::vector<NodeId>> groups;
  for (const auto& [id, s] : per_node) groups[detail::sign_rank(s)].push_back(id);
  std::string out = "nodes\tnode sign\n";
  for (const auto& [rank, ids] : groups) {
    static constexpr char kChars[] = {'+', '-', '0', '?'};
    out += detail::join(ids) + '\t' + kChars[rank] + '\n';
  }
  return out;
}

/// Nodes whose intervals render identically are grouped; groups ordered by
/// sign class (+, -, 0, ?), then lower bound and upper bound descending.
inline std::string render_interval_table(const std::map<NodeId, Interval>& per_node) {
  struct Group {
    Interval value;
    std::vector<NodeId> ids;
  };
  std::map<std::string, Group> by_text;
  for (const auto& [id, v] : per_node) {
    auto& g = by_text[to_string(v)];
    g.value = v;
    g.ids.push_back(id);
  }
  std::vector<Group> groups;
  for (auto& [text, g] : by_text) groups.push_back(std::move(g));
  std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) {
    const int ra = detail::sign_rank(classify(a.value)), rb = detail::sign_rank(classify(b.value));
    if (ra != rb) return ra < rb;
    if (a.value.lo() != b.value.lo()) return a.value.lo() > b.value.lo();
    if (a.value.hi() != b.value.hi()) return a.value.hi() > b.value.hi();
    return a.ids.front() < b.ids.front();
  });
  std::string out = "nodes\tnode interval\n";
  for (const auto& g : groups) out += detail::join(g.ids) + '\t' + to_string(g.value) + '\n';
  return out;
}

inline std::string render_table(const SignResult& r) { return render_sign_table(r.per_node); }
inline std::string render_table(const IntervalResult& r) { return render_interval_table(r.per_node); }

}  // namespace sqpn
