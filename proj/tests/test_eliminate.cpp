#include <doctest.h>

#include "pla/eliminate.hpp"
#include "pla/parser.hpp"
#include "support/checks.hpp"
#include "support/gen.hpp"

#include <random>

using namespace pla;

namespace {

ClosureType parse_type(const std::string& text, const Signature& sig) {
    ParseOptions opts;
    opts.sig = &sig;
    FormulaPtr f = parse_formula(text, opts);
    REQUIRE(f->kind == FKind::Type);
    return f->type->type;
}

} // namespace

TEST_CASE("convergence constants: the worked chain values, exactly") {
    Network net = gen::chain_network(3);
    Signature sig = net.sig();
    EliminationOptions opts;
    opts.delta = 3;

    // x child of the root carrying P1, against the tau base
    ClosureType p1 = parse_type("closed{E(_r,x); P1(x)}", sig);
    ClosureType base = parse_type("childofroot(x)", Signature{});
    auto c1 = convergence_constant(net, p1, base, opts);
    CHECK(c1.value.rat() == Rational(1, 3));
    CHECK(c1.eventually_constant);
    CHECK(c1.prov.kind == Provenance::Kind::ExactProduct);

    ClosureType np1 = parse_type("closed{E(_r,x); !P1(x)}", sig);
    CHECK(convergence_constant(net, np1, base, opts).value.rat() == Rational(2, 3));

    // two-level chain: P2 on x at level 2 whose parent carries P1
    ClosureType chain = parse_type("closed{E(_r,_p); E(_p,x); P2(x); P1(_p)}", sig);
    ClosureType base2 = parse_type("atlevel(x,2)", Signature{});
    CHECK(convergence_constant(net, chain, base2, opts).value.rat() == Rational(2, 9));

    // mismatched tau parts converge vacuously to 0
    auto vac = convergence_constant(net, p1, base2, opts);
    CHECK(vac.vacuous);
    CHECK(vac.value.rat() == 0);

    CHECK_ERRC(convergence_constant(net, p1, p1, opts), Errc::BadInput); // base must be over tau
}

TEST_CASE("convergence constants equal exact-table conditionals") {
    Network net = gen::chain_network(3);
    Signature sig = net.sig();
    EliminationOptions opts;
    opts.delta = 3;
    for (long long n : {2, 3}) {
        Tree tree = Tree::generate(TreeGenConfig::uniform(3, n));
        auto catalog = enumerate_complete_closure_types(sig, 1, 3, CatalogOptions{8, 12});
        for (const auto& p : *catalog) {
            ClosureType base = restrict_sig(p, Signature{});
            auto cc = convergence_constant(net, p, base, opts);
            // anchor: first tuple satisfying the tau-skeleton
            SigmaStructure bare(std::make_shared<Tree>(tree), sig);
            std::vector<int> anchor;
            enumerate_witnesses(base, bare, {-1}, [&](const std::vector<int>& t) {
                if (anchor.empty()) anchor = t;
            });
            REQUIRE(!anchor.empty());
            Value oracle = gen::subtree_event_mass(net, tree, p, anchor);
            CHECK(cc.value.rat() == oracle.rat());
        }
    }
}

TEST_CASE("balance constants: rank 0, rank 1, rank 2, all exact") {
    // one unary symbol P drawn with probability 1/3 at every node
    Network net;
    Network::Node pn;
    pn.name = "P";
    pn.arity = 1;
    pn.theta = f_const(Rational(1, 3));
    net.nodes.push_back(pn);
    validate(net);
    Signature sig = net.sig();
    EliminationOptions opts;
    opts.delta = 2;

    // rank 1: chi = "y child of x", p = chi and P(y)
    ClosureType chi = parse_type("closed{E(_r,x); E(x,y)}", sig);
    ClosureType p = parse_type("closed{E(_r,x); E(x,y); P(y)}", sig);
    // a complete outer type: x child of the root, P-pattern fixed
    ClosureType q = parse_type("closed{E(_r,x); P(x); !P(_r)}", sig);
    REQUIRE(q.complete());
    auto b = balance_constant(net, p, chi, q, opts);
    CHECK(b.value.rat() == Rational(1, 3));

    // exact-table expectation oracle on the 1+2+4 tree
    auto tree = std::make_shared<Tree>(Tree::from_parents({std::nullopt, 0, 0, 1, 1, 2, 2}));
    Value oracle = gen::table_balance(net, tree, p, chi, q, {1});
    CHECK(b.value.rat() == oracle.rat());

    // rank 0: y is the parent of x; alpha in {0,1} decided syntactically
    ClosureType chi0 = parse_type("closed{x; E(_r,y); E(y,x)}", sig);
    ClosureType p0 = parse_type("closed{x; E(_r,y); E(y,x); P(y)}", sig);
    ClosureType q_yes = parse_type("closed{E(_r,_p); E(_p,x); P(_p); !P(x); !P(_r)}", sig);
    ClosureType q_no = parse_type("closed{E(_r,_p); E(_p,x); !P(_p); !P(x); !P(_r)}", sig);
    REQUIRE(q_yes.complete());
    CHECK(balance_constant(net, p0, chi0, q_yes, opts).value.rat() == 1);
    CHECK(balance_constant(net, p0, chi0, q_no, opts).value.rat() == 0);

    // rank 2: an independent P-literal on each of two stacked children
    ClosureType chi2 = parse_type("closed{x; E(x,y1); E(y1,y2)}", sig);
    ClosureType p2 = parse_type("closed{x; E(x,y1); E(y1,y2); P(y1); P(y2)}", sig);
    ClosureType q_root = parse_type("closed{x; !P(x)}", sig);
    auto b2 = balance_constant(net, p2, chi2, q_root, opts);
    CHECK(b2.value.rat() == Rational(1, 9));
    Value oracle2 = gen::table_balance(net, tree, p2, chi2, q_root, {0});
    CHECK(b2.value.rat() == oracle2.rat());

    // positivity outside the fragment is refused
    ClosureType chi_bad = parse_type("closed{E(_r,x); E(x,y); P(y)}", sig);
    CHECK_ERRC(balance_constant(net, p, chi_bad, q, opts), Errc::PositivityUnknown);
}

TEST_CASE("eliminate: aggregation-free formulas come out exactly equivalent") {
    Network net = gen::unary_coin_network(Rational(1, 2));
    Signature sig = net.sig();
    ParseOptions popts;
    popts.sig = &sig;
    EliminationOptions opts;
    opts.delta = 2;

    std::mt19937_64 rng(77);
    for (const char* text :
         {"implies(R(x), or(1/4, R(y)))", "and(not(R(x)), x = y)", "0.75",
          "product(R(x), R(y), 1/2)"}) {
        FormulaPtr f = parse_formula(text, popts);
        auto res = eliminate(net, f, opts);
        for (int trial = 0; trial < 30; ++trial) {
            auto tree = std::make_shared<Tree>(gen::random_tree(rng, 6, 2));
            SigmaStructure A = gen::random_structure(tree, sig, rng);
            // injective tuples: complete closure types are pairwise distinct
            for (int a = 0; a < tree->size(); ++a)
                for (int b = 0; b < tree->size(); ++b) {
                    if (a == b) continue;
                    Valuation v{{"x", a}, {"y", b}};
                    std::vector<int> tuple;
                    for (const auto& name : res.cbf.outer_vars) tuple.push_back(v.at(name));
                    Value direct = evaluate(A, *f, v);
                    Value via = res.cbf.eval(A, tuple);
                    CHECK(direct.rat() == via.rat());
                }
        }
    }
}

TEST_CASE("eliminate: one child-conditioned mean") {
    // theta_P: child of the root -> 1/3, elsewhere 0
    Network net;
    Network::Node pn;
    pn.name = "P";
    pn.arity = 1;
    pn.theta = gen::cbf_theta(Signature{}, 1, 2, [](const ClosureType& t) {
        return t.var_level(0) == 1 ? Value::exact(Rational(1, 3)) : Value::zero();
    });
    net.nodes.push_back(pn);
    validate(net);
    Signature sig = net.sig();
    ParseOptions popts;
    popts.sig = &sig;
    EliminationOptions opts;
    opts.delta = 2;

    FormulaPtr f = parse_formula("am(P(y) : y : child(x,y))", popts);
    auto res = eliminate(net, f, opts);
    REQUIRE(res.cbf.outer_vars == std::vector<std::string>{"x"});
    for (const auto& [q, value] : res.cbf.cases) {
        if (q.var_level(0) == 0)
            CHECK(value.rat() == Rational(1, 3)); // children of the root
        else
            CHECK(value.rat() == 0); // level-1 children draw 0; leaves have none
    }
    // one ledger entry for the one aggregation, rank 1
    REQUIRE(res.report.ledger.size() == 1);
    CHECK(res.report.ledger[0].agg == "am");
    CHECK(res.report.ledger[0].ranks == std::vector<int>{1});
}

TEST_CASE("eliminate: the rank-1 sentence collapses to the constant 1/4") {
    Network net = gen::unary_coin_network(Rational(1, 2));
    Signature sig = net.sig();
    ParseOptions popts;
    popts.sig = &sig;
    EliminationOptions opts;
    opts.delta = 2;

    const std::string inner = "am(and(closed{E(_r,x); E(x,y)}, R(y)) : y : closed{E(_r,x); E(x,y)})";
    FormulaPtr psi =
        parse_formula("am(and(R(x), " + inner + ") : x : childofroot(x))", popts);
    auto res = eliminate(net, psi, opts);
    REQUIRE(res.cbf.outer_vars.empty());
    REQUIRE(!res.cbf.cases.empty());
    for (const auto& [q, value] : res.cbf.cases) CHECK(value.rat() == Rational(1, 4));

    // determinism: byte-identical reports on repeated runs
    auto res2 = eliminate(net, psi, opts);
    CHECK(res.report.to_json() == res2.report.to_json());
}

TEST_CASE("eliminate: admissible and unsupported cases") {
    Network net = gen::unary_coin_network(Rational(1, 2));
    Signature sig = net.sig();
    ParseOptions popts;
    popts.sig = &sig;
    EliminationOptions opts;
    opts.delta = 2;

    // admissible max over a positive-rank condition: licensed because the
    // network is closure-basic; witnesses see R(y)=1 with proportion 1/2,
    // so the limit is the max over surviving clusters = 1
    FormulaPtr mx = parse_formula("max(R(y) : y : child(x,y))", popts);
    auto res = eliminate(net, mx, opts);
    for (const auto& [q, value] : res.cbf.cases) {
        if (q.var_level(0) < 2)
            CHECK(value.rat() == 1);
        else
            CHECK(value.rat() == 0); // leaves: empty conditioning set
    }

    // rank-0 max: the witness is determined, F applied to the single value
    FormulaPtr mx0 = parse_formula("max(R(y) : y : closed{x; E(_r,y); E(y,x)})", popts);
    auto res0 = eliminate(net, mx0, opts);
    for (const auto& [q, value] : res0.cbf.cases) {
        if (q.var_level(0) != 2) {
            // the condition pins x to level 2; elsewhere it has no witness
            CHECK(value.rat() == 0);
            continue;
        }
        // value = R's bit on the parent variable in q
        int parent_var = q.parent[0];
        bool rp = q.lits[0].at({parent_var});
        CHECK(value.rat() == (rp ? 1 : 0));
    }

    // tsum can never be eliminated
    CHECK_ERRC(eliminate(net, parse_formula("tsum(R(y) : y : child(x,y))", popts), opts),
               Errc::UnsupportedAggregation);
    // arbitrary 0/1 conditioning formulas are outside the hypotheses
    CHECK_ERRC(eliminate(net, parse_formula("am(R(y) : y : R(y))", popts), opts),
               Errc::UnsupportedAggregation);
    // sigma-literal conditioning of positive rank: positivity unknown
    CHECK_ERRC(eliminate(net, parse_formula("am(1/2 : y : closed{E(_r,x); E(x,y); R(y)})", popts),
                         opts),
               Errc::PositivityUnknown);
}

TEST_CASE("non-closure-basic networks: exact refused, Monte Carlo close") {
    // theta_Q is an aggregation over the tree, so only MC constants exist
    Network net;
    Network::Node pn;
    pn.name = "P";
    pn.arity = 1;
    pn.theta = f_const(Rational(1, 2));
    net.nodes.push_back(pn);
    Network::Node qn;
    qn.name = "Q";
    qn.arity = 1;
    qn.parents = {"P"};
    {
        Signature sp;
        sp.add("P", 1);
        ParseOptions po;
        po.sig = &sp;
        qn.theta = parse_formula("am(P(y) : y : child(x1,y))", po);
    }
    net.nodes.push_back(qn);
    validate(net);
    CHECK_FALSE(net.closure_basic());

    Signature sig = net.sig();
    ClosureType p = parse_type("closed{E(_r,x); P(x)}", sig);
    ClosureType base = parse_type("childofroot(x)", Signature{});
    EliminationOptions opts;
    opts.delta = 2;
    CHECK_ERRC(convergence_constant(net, p, base, opts), Errc::NotClosureBasic);

    opts.mc_fallback = true;
    opts.mc_samples = 800;
    opts.mc_n = 6;
    auto mc = convergence_constant(net, p, base, opts);
    CHECK(mc.prov.kind == Provenance::Kind::MonteCarlo);
    CHECK(std::abs(mc.value.dbl() - 0.5) <= 0.1);
}

TEST_CASE("check_asymptotic_equivalence: identical formulas and trends") {
    Network net = gen::unary_coin_network(Rational(1, 2));
    Signature sig = net.sig();
    ParseOptions popts;
    popts.sig = &sig;

    FormulaPtr f = parse_formula("am(R(y) : y : childofroot(y))", popts);
    auto family = [](long long n) { return TreeGenConfig::uniform(1, n); };
    auto eq = check_asymptotic_equivalence(net, f, f, family, {5, 10}, 120, 0.05, 3);
    for (const auto& row : eq.rows) CHECK(row.fraction == 1.0);

    // against the eliminated constant 1/2: fractions should rise with n
    EliminationOptions opts;
    opts.delta = 1;
    auto res = eliminate(net, f, opts);
    FormulaPtr constant = f_cbf(res.cbf);
    // at n children the mean's sd is 1/(2 sqrt(n)); eps = 0.05 is two sds
    // at n = 400, so the pass fraction should clear 0.9 comfortably there
    auto eq2 = check_asymptotic_equivalence(net, f, constant, family, {10, 400}, 200, 0.05, 4);
    CHECK(eq2.rows[1].fraction >= eq2.rows[0].fraction);
    CHECK(eq2.rows[1].fraction >= 0.9);
}
