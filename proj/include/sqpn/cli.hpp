#pragma once

// Command-line front end. run_cli() is the whole program; tools/sqpn.cpp only
// forwards argv and the standard streams.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sqpn/abstraction.hpp"
#include "sqpn/format.hpp"
#include "sqpn/inference.hpp"
#include "sqpn/oracle.hpp"
#include "sqpn/propagate.hpp"

namespace sqpn {

namespace cli_detail {

/// Malformed command-line values; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw UsageError("expected true or false, got '" + s + "'");
}

inline std::pair<NodeId, bool> parse_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos) throw UsageError("expected NODE=true|false, got '" + s + "'");
  const std::string name = s.substr(0, eq);
  if (!is_valid_node_name(name)) throw UsageError("invalid node name '" + name + "'");
  return {NodeId(name), parse_bool(s.substr(eq + 1))};
}

inline Evidence parse_evidence(const std::vector<std::string>& items) {
  Evidence e;
  for (const auto& group : items) {
    std::stringstream ss(group);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      auto [id, v] = parse_assignment(item);
      if (e.contains(id)) throw UsageError("node '" + id.str() + "' given twice in --evidence");
      e.values[id] = v;
    }
  }
  return e;
}

inline Interval parse_interval(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw UsageError("expected lo,hi, got '" + s + "'");
  try {
    std::size_t used = 0;
    const std::string a = s.substr(0, comma), b = s.substr(comma + 1);
    const double lo = std::stod(a, &used);
    if (used != a.size()) throw UsageError("bad number '" + a + "'");
    const double hi = std::stod(b, &used);
    if (used != b.size()) throw UsageError("bad number '" + b + "'");
    return Interval{lo, hi};
  } catch (const std::logic_error&) {
    throw UsageError("expected lo,hi, got '" + s + "'");
  }
}

inline void check_nodes(const Network& net, const Evidence& e) {
  for (const auto& [id, v] : e.values) net.index(id);
}

/// Pr(node) given the evidence: by enumeration when the relevant part of the
/// network is quantified, else the declared prior of an unobserved root.
inline double marginal(const Network& net, const Evidence& evidence, const NodeId& node) {
  std::vector<NodeId> roots{node};
  for (const auto& [id, v] : evidence.values) roots.push_back(id);
  Network sub = ancestral_subnetwork(net, roots);
  if (sub.fully_quantified() && sub.size() <= kEnumerationCap) return posterior(QuantifiedNetwork(std::move(sub)), evidence, node);
  const Node& n = net.node(node);
  if (n.prior && evidence.values.empty()) return *n.prior;
  throw PreconditionError("exact entry for '" + node.str() + "' needs a quantified ancestral network");
}

}  // namespace cli_detail

/// Runs the sqpn command line. Exit codes: 0 success, 1 domain error,
/// 2 usage error.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  CLI::App app{"Semi-qualitative probabilistic networks", "sqpn"};
  app.require_subcommand(1);
  bool lenient = false;
  app.add_flag("--lenient", lenient, "Ignore (with a warning) signs on arcs into quantified nodes");

  std::string file;
  auto add_file = [&](CLI::App* sub) { sub->add_option("file", file, "Network file (.sqpn)")->required(); };

  auto* validate_cmd = app.add_subcommand("validate", "Check a network file");
  add_file(validate_cmd);

  auto* abstract_cmd = app.add_subcommand("abstract", "Abstract CPTs to arc signs");
  add_file(abstract_cmd);

  bool oracle_tightening = false;
  auto* intervals_cmd = app.add_subcommand("intervals", "Print the interval network");
  add_file(intervals_cmd);
  intervals_cmd->add_flag("--oracle-tightening", oracle_tightening, "Tighten reverse influences by exact inference");

  std::string observe, mode = "maximal", strength;
  std::vector<std::string> evidence_items;
  std::size_t m = 0;
  bool signs = false;
  auto* propagate_cmd = app.add_subcommand("propagate", "Propagate an observation");
  add_file(propagate_cmd);
  propagate_cmd->add_option("--observe", observe, "NODE=true|false")->required();
  propagate_cmd->add_option("--mode", mode, "Entry interval")->check(CLI::IsMember({"exact", "maximal", "ignorant"}));
  propagate_cmd->add_flag("--signs", signs, "Sign propagation instead of interval propagation");
  propagate_cmd->add_option("--strength", strength, "Scale a maximal result by lo,hi");
  propagate_cmd->add_option("--m", m, "Per-node interval change bound")->check(CLI::PositiveNumber);
  propagate_cmd->add_option("--evidence", evidence_items, "Earlier observations NODE=value,...");

  std::string source, target;
  bool sign_only = false;
  auto* resolve_cmd = app.add_subcommand("resolve", "Resolve a trade-off by node reduction");
  add_file(resolve_cmd);
  resolve_cmd->add_option("--source", source)->required();
  resolve_cmd->add_option("--target", target)->required();
  resolve_cmd->add_flag("--sign-only", sign_only, "Re-abstract to signs rather than intervals");

  auto* oracle_cmd = app.add_subcommand("oracle", "Exact posterior by enumeration");
  add_file(oracle_cmd);
  oracle_cmd->add_option("--target", target)->required();
  oracle_cmd->add_option("--evidence", evidence_items, "NODE=value,...");

  std::size_t trials = 100;
  std::uint64_t seed = 1;
  auto* audit_cmd = app.add_subcommand("audit", "Check propagated intervals against exact inference");
  add_file(audit_cmd);
  audit_cmd->add_option("--trials", trials);
  audit_cmd->add_option("--seed", seed, "Overridden by SQPN_SEED");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "sqpn: " << e.what() << '\n';
    return 2;
  }

  try {
    std::vector<Diagnostic> warnings;
    Network net;
    try {
      net = parse_network(read_file(file), ParseOptions{lenient}, &warnings);
    } catch (const ParseError& e) {
      for (const auto& d : e.diagnostics()) err << file << ':' << to_string(d) << '\n';
      return 1;
    }
    for (const auto& d : warnings) err << file << ':' << to_string(d) << '\n';

    if (validate_cmd->parsed()) {
      out << "valid\t" << net.name << '\t' << net.size() << " nodes\t" << net.arcs().size() << " arcs\n";
    } else if (abstract_cmd->parsed()) {
      out << "arc\tsign\n";
      for (const Arc& a : net.arcs()) out << a.parent << " -> " << a.child << '\t' << arc_sign(net, a) << '\n';
    } else if (intervals_cmd->parsed()) {
      AbstractionOptions opts;
      opts.oracle_tightening = oracle_tightening;
      const auto inet = build_interval_network(net, opts);
      out << "source\ttarget\tinterval\torigin\n";
      for (const auto& [key, f] : inet.influences())
        out << f.source << '\t' << f.target << '\t' << to_string(f.interval) << '\t' << to_string(f.origin) << '\n';
    } else if (propagate_cmd->parsed()) {
      auto [node, value] = parse_assignment(observe);
      const Evidence prior = parse_evidence(evidence_items);
      check_nodes(net, prior);
      net.index(node);
      if (!strength.empty() && (signs || mode != "maximal")) throw Error("--strength applies to maximal interval propagation only");
      if (signs) {
        if (m) throw Error("--m applies to interval propagation only");
        auto r = propagate_signs(net, prior, SignObservation{node, value ? Sign::Positive : Sign::Negative});
        out << render_table(r);
      } else {
        EntryMode em = mode == "exact" ? EntryMode::Exact : mode == "ignorant" ? EntryMode::Ignorant : EntryMode::Maximal;
        std::optional<double> x;
        if (em == EntryMode::Exact) x = marginal(net, prior, node);
        const Interval entry = entry_interval(node, value, x, em);
        PropagationConfig cfg;
        if (m) cfg.m = m;
        auto r = propagate_intervals(build_interval_network(net), prior, Observation{node, value, entry}, cfg);
        if (!strength.empty()) r = apply_strength(std::move(r), parse_interval(strength));
        out << render_table(r);
      }
    } else if (resolve_cmd->parsed()) {
      const NodeId s(source), t(target);
      ResolveOptions opts;
      opts.sign_only = sign_only;
      const auto r = resolve_tradeoff(net, s, t, opts);
      out << "source\ttarget\tinterval\tsign\tresolved\tremoved\n";
      out << s << '\t' << t << '\t' << to_string(r.net_influence) << '\t' << classify(r.net_influence) << '\t'
          << (r.resolved ? "yes" : "no") << '\t' << detail::join(r.removed_nodes) << '\n';
    } else if (oracle_cmd->parsed()) {
      const Evidence e = parse_evidence(evidence_items);
      check_nodes(net, e);
      const NodeId t(target);
      std::vector<NodeId> roots{t};
      for (const auto& [id, v] : e.values) roots.push_back(id);
      const double post = posterior(QuantifiedNetwork(ancestral_subnetwork(net, roots)), e, t);
      std::string ev;
      for (const auto& [id, v] : e.values) ev += (ev.empty() ? "" : ",") + id.str() + "=" + (v ? "true" : "false");
      out << "target\tevidence\tprobability\n" << t << '\t' << (ev.empty() ? "-" : ev) << '\t' << format_number(post) << '\n';
    } else if (audit_cmd->parsed()) {
      if (const char* env = std::getenv("SQPN_SEED"); env && *env) {
        char* end = nullptr;
        seed = std::strtoull(env, &end, 10);
        if (*end) throw UsageError("SQPN_SEED must be an unsigned integer");
      }
      SoundnessOptions opts;
      opts.seed = seed;
      const auto report = soundness_report(QuantifiedNetwork(net), trials, opts);
      out << render_soundness(report);
      err << "contained " << report.rows.size() - report.failures() << " of " << report.rows.size() << '\n';
    }
  } catch (const UsageError& e) {
    err << "sqpn: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "sqpn: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace sqpn
