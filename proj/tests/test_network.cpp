#include <doctest.h>

#include "pla/distribution.hpp"
#include "pla/parser.hpp"
#include "support/checks.hpp"
#include "support/gen.hpp"

#include <random>
#include <sstream>

using namespace pla;

namespace {

// root with two children; one unary symbol P with theta "child of root ->
// 1/3, root -> 0" (the tiny worked example)
struct TinyExample {
    TreePtr tree;
    Network net;
    TinyExample() {
        tree = std::make_shared<Tree>(Tree::from_parents({std::nullopt, 0, 0}));
        Network::Node p;
        p.name = "P";
        p.arity = 1;
        p.theta = gen::cbf_theta(Signature{}, 1, 1, [](const ClosureType& t) {
            return t.var_level(0) == 1 ? Value::exact(Rational(1, 3)) : Value::zero();
        });
        net.nodes.push_back(p);
        validate(net);
    }
};

} // namespace

TEST_CASE("validate: levels, cycles, illegal symbols") {
    // P1 -> P2 -> P3 -> R plus P2 -> R gives levels 0,1,2,3
    Network net;
    for (const char* name : {"P1", "P2", "P3"}) {
        Network::Node n;
        n.name = name;
        n.arity = 1;
        n.theta = f_const(Rational(1, 2));
        net.nodes.push_back(n);
    }
    Network::Node r;
    r.name = "R";
    r.arity = 2;
    r.theta = f_const(Rational(1, 2));
    net.nodes.push_back(r);
    net.nodes[1].parents = {"P1"};
    net.nodes[2].parents = {"P2"};
    net.nodes[3].parents = {"P3", "P2"};
    CHECK(validate(net) == std::vector<int>{0, 1, 2, 3});
    CHECK(net.height() == 3);

    // empty network: height -1
    Network empty;
    validate(empty);
    CHECK(empty.height() == -1);

    // cycle
    Network cyc = net;
    cyc.nodes[0].parents = {"R"};
    CHECK_ERRC(validate(cyc), Errc::CyclicDependency);

    // theta mentioning a non-parent
    Network bad = net;
    Signature sig = bad.sig();
    ParseOptions opts;
    opts.sig = &sig;
    bad.nodes[1].theta = parse_formula("P3(x1)", opts);
    CHECK_ERRC(validate(bad), Errc::IllegalSymbolInTheta);

    // theta using a variable outside x1..arity
    Network bad2 = net;
    bad2.nodes[0].theta = parse_formula("am(1/2 : y : child(x2, y))", opts);
    CHECK_ERRC(validate(bad2), Errc::ArityMismatch);
}

TEST_CASE("network files round-trip") {
    std::string text = "network v1\n"
                       "relation P arity=1 parents=\n"
                       "relation Q arity=1 parents=P\n"
                       "theta P = cbf(closed{x1} -> 0 | closed{E(_r,x1)} -> 1/3)\n"
                       "theta Q = am(P(y) : y : child(x1,y))\n";
    std::istringstream in(text);
    Network net = parse_network(in);
    CHECK(net.nodes.size() == 2);
    CHECK(net.levels == std::vector<int>{0, 1});
    CHECK_FALSE(net.closure_basic()); // Q's theta is an aggregation

    std::ostringstream out;
    write_network(out, net);
    std::istringstream in2(out.str());
    Network net2 = parse_network(in2);
    CHECK(net2.nodes.size() == 2);
    CHECK(formula_equal(*net.nodes[0].theta, *net2.nodes[0].theta));
    CHECK(formula_equal(*net.nodes[1].theta, *net2.nodes[1].theta));
}

TEST_CASE("exact distribution: worked example and sum to one") {
    TinyExample ex;
    ExactDistribution dist(ex.tree, ex.net, 24);
    CHECK(dist.bits() == 3);
    CHECK(dist.total().rat() == 1);

    // P holds for both children, not the root: (1/3)(1/3)(1-0) = 1/9
    Signature sig = ex.net.sig();
    ParseOptions opts;
    opts.sig = &sig;
    FormulaPtr both =
        parse_formula("and(P(a), P(b), not(P(r)))", opts);
    Value p = dist.event_mass(*both, {{"a", 1}, {"b", 2}, {"r", 0}});
    CHECK(p.rat() == Rational(1, 9));

    // marginal of P(child) = 1/3 = A'(theta_P(child))
    CHECK(dist.marginal("P", {1}).rat() == Rational(1, 3));
    CHECK(dist.marginal("P", {0}).rat() == 0);

    // theta == 1 concentrates on the all-P world
    Network ones;
    Network::Node n;
    n.name = "P";
    n.arity = 1;
    n.theta = f_const(Rational(1));
    ones.nodes.push_back(n);
    validate(ones);
    ExactDistribution d1(ex.tree, ones, 24);
    CHECK(d1.prob(d1.world_count() - 1).rat() == 1);

    // conditional version: P(a) and P(b) independent given the lower level
    FormulaPtr pa = parse_formula("P(a)", opts);
    FormulaPtr pb = parse_formula("P(b)", opts);
    Value cond = dist.conditional(*pa, *pb, {{"a", 1}, {"b", 2}});
    CHECK(cond.rat() == Rational(1, 3));

    // exists x P(x): 1 - (2/3)^2 = 5/9 since the root's theta is 0
    FormulaPtr ex_p = parse_formula("exists x (P(x))", opts);
    CHECK(dist.event_mass(*ex_p, {}).rat() == Rational(5, 9));

    // NotZeroOne on a genuinely fractional event formula
    CHECK_ERRC(dist.event_mass(*parse_formula("am(P(y) : y : T)", opts), {}), Errc::NotZeroOne);

    CHECK_ERRC(exact_distribution(std::make_shared<Tree>(Tree::generate(TreeGenConfig::uniform(2, 4))),
                                  ex.net, 20),
               Errc::TooLarge);
}

TEST_CASE("level recursion equals one-pass construction (random networks)") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 12; ++trial) {
        auto tree = std::make_shared<Tree>(gen::random_tree(rng, 4, 2));
        Network net = gen::chain_network(2);
        ExactDistribution by_level(tree, net, 24);
        // one symbol at a time in topological order: same table because each
        // theta reads strictly lower levels
        Network p1only = net.subnetwork({"P1"});
        Network p12 = net.subnetwork({"P1", "P2"});
        ExactDistribution d1(tree, p1only, 24);
        ExactDistribution d12(tree, p12, 24);
        // marginalizing the big table onto the subnetworks reproduces them
        auto m1 = by_level.marginal_table_up_to_level(0);
        auto m12 = by_level.marginal_table_up_to_level(1);
        REQUIRE(m1.size() == d1.world_count());
        REQUIRE(m12.size() == d12.world_count());
        for (uint64_t w = 0; w < d1.world_count(); ++w) CHECK(m1[w].rat() == d1.prob(w).rat());
        for (uint64_t w = 0; w < d12.world_count(); ++w) CHECK(m12[w].rat() == d12.prob(w).rat());
        CHECK(d12.total().rat() == 1);
        CHECK(by_level.total().rat() == 1);
    }
}

TEST_CASE("pushing a lower-level event up preserves its probability") {
    // Lemma about conditioning: an event on the sigma_{l-1} worlds has the
    // same mass measured in the level-l distribution
    auto tree = std::make_shared<Tree>(Tree::from_parents({std::nullopt, 0, 0}));
    Network net = gen::chain_network(2);
    Network sub = net.subnetwork({"P1"});
    ExactDistribution low(tree, sub, 24);
    ExactDistribution high(tree, net, 24);
    Signature sig = net.sig();
    ParseOptions opts;
    opts.sig = &sig;
    FormulaPtr event = parse_formula("P1(x)", opts);
    for (int x = 0; x < 3; ++x) {
        Valuation v{{"x", x}};
        CHECK(low.event_mass(*event, v).rat() == high.event_mass(*event, v).rat());
    }
}

TEST_CASE("sampler: degenerate thetas, calibration, independence") {
    TinyExample ex;

    // theta == 0 gives the empty relation
    Network zeros;
    Network::Node n;
    n.name = "P";
    n.arity = 1;
    n.theta = f_const(Rational(0));
    zeros.nodes.push_back(n);
    validate(zeros);
    SigmaStructure empty = sample_world(ex.tree, zeros, 7);
    CHECK(empty.tuple_count(0) == 0);

    // frequency of P(child) over many samples within 4 standard errors
    const long long N = 20000;
    long long hits = 0, joint = 0;
    for (long long s = 0; s < N; ++s) {
        SigmaStructure A = sample_world(ex.tree, ex.net, 1000 + s);
        if (A.holds(0, std::vector<int>{1})) ++hits;
        if (A.holds(0, std::vector<int>{1}) && A.holds(0, std::vector<int>{2})) ++joint;
    }
    double p = 1.0 / 3.0;
    double se = std::sqrt(p * (1 - p) / N);
    CHECK(std::abs(hits / double(N) - p) <= 4 * se);
    double pj = 1.0 / 9.0;
    double sej = std::sqrt(pj * (1 - pj) / N);
    CHECK(std::abs(joint / double(N) - pj) <= 4 * sej);

    // determinism per seed
    SigmaStructure a = sample_world(ex.tree, ex.net, 99);
    SigmaStructure b = sample_world(ex.tree, ex.net, 99);
    for (int v = 0; v < 3; ++v)
        CHECK(a.holds(0, std::vector<int>{v}) == b.holds(0, std::vector<int>{v}));
}

TEST_CASE("event_probability: exact and sampler modes agree") {
    TinyExample ex;
    Signature sig = ex.net.sig();
    ParseOptions opts;
    opts.sig = &sig;
    FormulaPtr event = parse_formula("exists x (P(x))", opts);

    WorldDistribution exact;
    exact.exact = std::make_shared<ExactDistribution>(ex.tree, ex.net, 24);
    auto pe = event_probability(exact, *event, {});
    CHECK(pe.exact);
    CHECK(pe.p.rat() == Rational(5, 9));

    WorldDistribution mc;
    mc.tree = ex.tree;
    mc.net = &ex.net;
    mc.seed = 5;
    mc.samples = 20000;
    auto pm = event_probability(mc, *event, {});
    CHECK_FALSE(pm.exact);
    CHECK(std::abs(pm.mc.estimate - 5.0 / 9.0) <= 4 * pm.mc.se);

    // trivial event
    CHECK(event_probability(exact, *f_true(), {}).p.rat() == 1);
}

TEST_CASE("thetas may read the tree through aggregations") {
    // theta_Q(x) = am(P1(y) : y : child(x,y)): probability equals the
    // proportion of P1-children; checked against the exact table marginals
    auto tree = std::make_shared<Tree>(Tree::from_parents({std::nullopt, 0, 0, 1, 1}));
    Network net;
    Network::Node p;
    p.name = "P1";
    p.arity = 1;
    p.theta = f_const(Rational(1, 2));
    net.nodes.push_back(p);
    Network::Node q;
    q.name = "Q";
    q.arity = 1;
    q.parents = {"P1"};
    Signature sig1;
    sig1.add("P1", 1);
    ParseOptions opts;
    opts.sig = &sig1;
    q.theta = parse_formula("am(P1(y) : y : child(x1,y))", opts);
    net.nodes.push_back(q);
    validate(net);

    ExactDistribution dist(tree, net, 24);
    CHECK(dist.total().rat() == 1);
    // E[Q(1)] = E[am over children 3,4 of P1] = 1/2
    CHECK(dist.marginal("Q", {1}).rat() == Rational(1, 2));
    // leaves have no children: the aggregation conditioning set is empty,
    // value 0, so Q never holds there
    CHECK(dist.marginal("Q", {3}).rat() == 0);
}
