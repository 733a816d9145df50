#include <gtest/gtest.h>

#include "sqpn/abstraction.hpp"
#include "support/fixtures.hpp"
#include "support/random_networks.hpp"

using namespace sqpn;

namespace {

NodeId id(const char* s) { return NodeId(s); }

const Arc& arc_of(const Network& net, const char* p, const char* c) { return *net.arc(id(p), id(c)); }

Network ab(double prior, double b_given_not_a, double b_given_a) {
  Network net;
  net.add_node(id("A"), prior).add_node(id("B")).add_arc(id("A"), id("B"));
  net.set_cpt(id("B"), Cpt({id("A")}, {b_given_not_a, b_given_a}));
  return net;
}

}  // namespace

TEST(InfluenceFromCpt, TwoCauses) {
  const Network net = testkit::load_fixture("two_causes.sqpn");
  EXPECT_TRUE(approx_equal(influence_interval_from_cpt(net, arc_of(net, "A", "B")), Interval(0.2, 0.4)));
  EXPECT_TRUE(approx_equal(influence_interval_from_cpt(net, arc_of(net, "C", "B")), Interval(-0.3, -0.1)));
  EXPECT_EQ(abstract_cpt_to_sign(net, arc_of(net, "A", "B")), Sign::Positive);
  EXPECT_EQ(abstract_cpt_to_sign(net, arc_of(net, "C", "B")), Sign::Negative);
}

TEST(InfluenceFromCpt, ConstantCptIsZero) {
  const Network net = ab(0.5, 0.3, 0.3);
  EXPECT_EQ(influence_interval_from_cpt(net, arc_of(net, "A", "B")), Interval(0.0, 0.0));
  EXPECT_EQ(abstract_cpt_to_sign(net, arc_of(net, "A", "B")), Sign::Zero);
}

TEST(InfluenceFromCpt, MissingCpt) {
  Network net;
  net.add_node(id("A")).add_node(id("B")).add_arc(id("A"), id("B"), Sign::Positive);
  EXPECT_THROW(influence_interval_from_cpt(net, arc_of(net, "A", "B")), PreconditionError);
}

TEST(InfluenceFromCpt, BoundsAreAttained) {
  testkit::Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const Network net = testkit::quantified_network(rng, testkit::random_dag_skeleton(rng, 6, 0.6));
    for (const Arc& a : net.arcs()) {
      const Interval iv = influence_interval_from_cpt(net, a);
      const auto c = net.index(a.child);
      const auto table = net.table(c);
      bool lo = false, hi = false;
      detail::for_each_context(net.parents(c).size(), detail::parent_slot(net, c, net.index(a.parent)),
                               [&](std::size_t off, std::size_t on) {
                                 const double d = table[on] - table[off];
                                 lo = lo || std::abs(d - iv.lo()) < 1e-12;
                                 hi = hi || std::abs(d - iv.hi()) < 1e-12;
                               });
      EXPECT_TRUE(lo && hi);
    }
  }
}

TEST(DefaultReverse, UnitIntervalOfForwardSign) {
  EXPECT_EQ(default_reverse(Interval(0.2, 0.4)), Interval(0.0, 1.0));
  EXPECT_EQ(default_reverse(Interval(-0.2, -0.2)), Interval(-1.0, 0.0));
  EXPECT_EQ(default_reverse(Interval(0.0, 0.0)), Interval(0.0, 0.0));
  EXPECT_EQ(default_reverse(Interval(-0.1, 0.3)), Interval(-1.0, 1.0));
}

TEST(TightenRoot, Examples) {
  EXPECT_TRUE(approx_equal(tighten_reverse_root(0.3, Sign::Positive), Interval(0.0, 0.7)));
  EXPECT_TRUE(approx_equal(tighten_reverse_root(0.5, Sign::Positive), Interval(0.0, 0.5)));
  EXPECT_TRUE(approx_equal(tighten_reverse_root(0.3, Sign::Negative), Interval(-0.7, 0.0)));
  EXPECT_THROW(tighten_reverse_root(0.3, Sign::Ambiguous), PreconditionError);
}

TEST(TightenBayes, AbFragment) {
  const Network net = ab(0.4, 0.4, 0.2);
  const Interval r = tighten_reverse_bayes(net, arc_of(net, "A", "B"));
  EXPECT_NEAR(r.lo(), 0.25 - 0.32 / 0.68, 1e-12);
  EXPECT_NEAR(r.hi(), 0.25 - 0.32 / 0.68, 1e-12);
}

TEST(TightenBayes, IndependentAndDeterministic) {
  const Network ind = ab(0.4, 0.3, 0.3);
  EXPECT_EQ(tighten_reverse_bayes(ind, arc_of(ind, "A", "B")), Interval(0.0, 0.0));
  const Network det = ab(0.5, 0.0, 1.0);
  EXPECT_TRUE(approx_equal(tighten_reverse_bayes(det, arc_of(det, "A", "B")), Interval(1.0, 1.0)));
}

TEST(TightenBayes, NeedsRootFamily) {
  // C's other parent B is not a root, so Bayes within the family is not enough.
  const Network net = testkit::load_fixture("interval_example.sqpn");
  EXPECT_FALSE(bayes_applicable(net, arc_of(net, "D", "C")));
  EXPECT_THROW(tighten_reverse_bayes(net, arc_of(net, "D", "C")), PreconditionError);
}

TEST(TightenBayes, MatchesEnumeration) {
  testkit::Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    // Two roots and a child with both as parents.
    Network net;
    net.add_node(id("A"), testkit::uniform(rng, 0.05, 0.95)).add_node(id("B"), testkit::uniform(rng, 0.05, 0.95));
    net.add_node(id("C")).add_arc(id("A"), id("C")).add_arc(id("B"), id("C"));
    net.set_cpt(id("C"), Cpt({id("A"), id("B")}, {testkit::uniform(rng), testkit::uniform(rng), testkit::uniform(rng),
                                                  testkit::uniform(rng)}));
    const Interval r = tighten_reverse_bayes(net, arc_of(net, "A", "C"));
    const auto oracle = detail::oracle_reverse(net, arc_of(net, "A", "C"), 16);
    ASSERT_TRUE(oracle.has_value());
    EXPECT_TRUE(approx_equal(r, *oracle, 1e-9));
    EXPECT_EQ(classify(r), classify(influence_interval_from_cpt(net, arc_of(net, "A", "C"))));
  }
}

TEST(SynergyFromCpt, TwoCauses) {
  const Network net = testkit::load_fixture("two_causes.sqpn");
  EXPECT_EQ(synergy_sign_from_cpt(net, id("B"), true, id("A"), id("C")), Sign::Negative);
  EXPECT_EQ(synergy_sign_from_cpt(net, id("B"), false, id("A"), id("C")), Sign::Positive);
  EXPECT_EQ(synergy_sign_from_cpt(net, id("B"), true, id("C"), id("A")), Sign::Negative);
}

TEST(SynergyFromCpt, RankOneTableIsZero) {
  Network net;
  net.add_node(id("A"), 0.5).add_node(id("C"), 0.5).add_node(id("B"));
  net.add_arc(id("A"), id("B")).add_arc(id("C"), id("B"));
  // Pr(b | a, c) = f(a) g(c)
  net.set_cpt(id("B"), Cpt({id("A"), id("C")}, {0.2 * 0.5, 0.2 * 0.9, 0.8 * 0.5, 0.8 * 0.9}));
  EXPECT_EQ(synergy_sign_from_cpt(net, id("B"), true, id("A"), id("C")), Sign::Zero);
}

TEST(BuildIntervalNetwork, QualitativeIsAllUnit) {
  Network net;
  net.add_node(id("A")).add_node(id("B")).add_node(id("C"));
  net.add_arc(id("A"), id("B"), Sign::Positive).add_arc(id("C"), id("B"), Sign::Negative);
  const auto inet = build_interval_network(net);
  EXPECT_EQ(inet.influences().size(), 4u);
  EXPECT_EQ(inet.influence(id("A"), id("B")).interval, Interval(0.0, 1.0));
  EXPECT_EQ(inet.influence(id("C"), id("B")).interval, Interval(-1.0, 0.0));
  EXPECT_EQ(inet.influence(id("B"), id("A")).interval, Interval(0.0, 1.0));
  EXPECT_EQ(inet.influence(id("B"), id("A")).origin, InfluenceOrigin::DefaultReverse);
  EXPECT_EQ(inet.intercausal_interval(id("B"), true, id("A"), id("C")), Interval(-1.0, 1.0));
}

TEST(BuildIntervalNetwork, QuantifiedTwoCauses) {
  const Network net = testkit::load_fixture("two_causes.sqpn");
  const auto inet = build_interval_network(net);
  EXPECT_TRUE(approx_equal(inet.influence(id("A"), id("B")).interval, Interval(0.2, 0.4)));
  EXPECT_TRUE(approx_equal(inet.influence(id("C"), id("B")).interval, Interval(-0.3, -0.1)));
  EXPECT_EQ(inet.influence(id("A"), id("B")).origin, InfluenceOrigin::FromCpt);
  EXPECT_EQ(inet.intercausal_interval(id("B"), true, id("A"), id("C")), Interval(-1.0, 0.0));
  EXPECT_EQ(inet.intercausal_interval(id("B"), false, id("C"), id("A")), Interval(0.0, 1.0));
}

TEST(BuildIntervalNetwork, ExampleQuantities) {
  const Network net = testkit::load_fixture("interval_example.sqpn");
  const auto inet = build_interval_network(net);
  EXPECT_TRUE(approx_equal(inet.influence(id("A"), id("B")).interval, Interval::point(-0.2)));
  EXPECT_TRUE(approx_equal(inet.influence(id("C"), id("D")).interval, Interval(0.0, 0.7)));
  EXPECT_EQ(inet.influence(id("C"), id("D")).origin, InfluenceOrigin::TightenedReverse);
  EXPECT_EQ(inet.influence(id("B"), id("A")).origin, InfluenceOrigin::Pinned);
  EXPECT_TRUE(approx_equal(inet.influence(id("B"), id("A")).interval, Interval::point(-0.1)));
}

TEST(BuildIntervalNetwork, WithoutPinBayesIsUsed) {
  const Network net = ab(0.4, 0.4, 0.2);
  const auto inet = build_interval_network(net);
  const auto& rev = inet.influence(id("B"), id("A"));
  EXPECT_EQ(rev.origin, InfluenceOrigin::TightenedReverse);
  EXPECT_NEAR(rev.interval.lo(), -0.220588235294, 1e-9);
  EXPECT_FALSE(rev.root_bound_conflict);
}

TEST(BuildIntervalNetwork, RootBoundConflictIsFlagged) {
  const Network det = ab(0.5, 0.0, 1.0);
  const auto& rev = build_interval_network(det).influence(id("B"), id("A"));
  EXPECT_TRUE(approx_equal(rev.interval, Interval::point(1.0)));
  EXPECT_TRUE(rev.root_bound_conflict);
}

TEST(BuildIntervalNetwork, OracleTighteningIsOptIn) {
  const Network net = testkit::load_fixture("interval_example.sqpn");
  // K -> L: K is not a root, so without the oracle the reverse stays default.
  EXPECT_EQ(build_interval_network(net).influence(id("L"), id("K")).origin, InfluenceOrigin::DefaultReverse);
  testkit::Rng rng(4);
  Network q = testkit::quantified_network(rng, testkit::chain_skeleton(4));
  AbstractionOptions opts;
  opts.oracle_tightening = true;
  const auto inet = build_interval_network(q, opts);
  const auto& rev = inet.influence(q.id(2), q.id(1));
  EXPECT_EQ(rev.origin, InfluenceOrigin::TightenedReverse);
  EXPECT_TRUE(rev.interval.width() < 1e-12);
}

TEST(BuildIntervalNetworkProperty, ReverseKeepsForwardSign) {
  testkit::Rng rng(12);
  for (int t = 0; t < 100; ++t) {
    const Network net = testkit::quantified_network(rng, testkit::random_dag_skeleton(rng, 7, 0.5));
    AbstractionOptions opts;
    opts.oracle_tightening = t % 2;
    const auto inet = build_interval_network(net, opts);
    EXPECT_EQ(inet.influences().size(), 2 * net.arcs().size());
    for (const Arc& a : net.arcs()) {
      const auto& f = inet.influence(a.parent, a.child);
      const auto& r = inet.influence(a.child, a.parent);
      EXPECT_EQ(classify(f.interval), abstract_cpt_to_sign(net, a));
      const Interval unit = sign_to_unit_interval(classify(f.interval));
      EXPECT_TRUE(unit.contains(r.interval, 1e-12));
    }
  }
}

// Quantifying nodes one at a time never widens an interval, except where a
// root bound installed earlier is contradicted by the exact Bayes interval.
TEST(BuildIntervalNetworkProperty, QuantificationNeverWidens) {
  testkit::Rng rng(13);
  for (int t = 0; t < 60; ++t) {
    const Network full = testkit::quantified_network(rng, testkit::random_dag_skeleton(rng, 6, 0.5));
    Network partial;
    for (const Node& n : full.nodes()) partial.add_node(n.id);
    for (const Arc& a : full.arcs()) partial.add_arc(a.parent, a.child, abstract_cpt_to_sign(full, a));
    auto before = build_interval_network(partial);
    for (auto i : topo_indices(full)) {
      const NodeId& node = full.id(i);
      if (full.parents(i).empty()) {
        partial.set_prior(node, full.node(i).prior);
      } else {
        for (auto p : full.parents(i)) partial.set_arc_sign(full.id(p), node, std::nullopt);
        partial.set_cpt(node, full.node(i).cpt);
      }
      auto after = build_interval_network(partial);
      for (const auto& [key, f] : after.influences()) {
        const auto& old = before.influence(key.first, key.second);
        if (f.root_bound_conflict && old.origin == InfluenceOrigin::TightenedReverse) continue;
        EXPECT_TRUE(old.interval.contains(f.interval, 1e-12))
            << key.first << "->" << key.second << " " << old.interval << " then " << f.interval;
      }
      before = std::move(after);
    }
  }
}
