#include <doctest.h>

#include "pla/battery.hpp"
#include "pla/ct_probe.hpp"
#include "pla/evaluate.hpp"
#include "pla/fo.hpp"
#include "pla/parser.hpp"
#include "pla/registry.hpp"
#include "support/checks.hpp"
#include "support/fo_oracle.hpp"
#include "support/gen.hpp"
#include "support/reference_eval.hpp"

#include <random>

using namespace pla;

namespace {

Signature sig_ub() {
    Signature s;
    s.add("P", 1);
    s.add("R", 2);
    return s;
}

SigmaStructure tiny_structure() {
    // root 0 with children 1, 2
    auto tree = std::make_shared<Tree>(Tree::from_parents({std::nullopt, 0, 0}));
    Signature s;
    s.add("R", 1);
    SigmaStructure A(tree, s);
    A.set(0, std::vector<int>{1}, true);
    return A;
}

} // namespace

TEST_CASE("parser: round trips, sugar, and errors") {
    Signature sig = sig_ub();
    ParseOptions opts;
    opts.sig = &sig;

    for (const char* text : {
             "0.5",
             "1/3",
             "x = y",
             "not(E(x,y))",
             "am(R(x,y) : y : child(x,y))",
             "implies(P(x), or(0.25, R(x,x)))",
             "min(max(P(y) : y : T) : z : T)",
             "lengthpow(1/2)(x = x : y : T)",
             "cbf(closed{x} -> 1/3 | closed{E(_r,x)} -> 0.25)",
             "affine(1/2, 1/4, P(x))",
         }) {
        FormulaPtr f = parse_formula(text, opts);
        FormulaPtr again = parse_formula(f->str(), opts);
        CHECK(formula_equal(*f, *again));
    }

    CHECK(parse_formula("0.5")->value == Rational(1, 2));
    FormulaPtr agg = parse_formula("am( R(x,y) : y : child(x,y) )", opts);
    CHECK(agg->kind == FKind::Agg);
    CHECK(agg->vars == std::vector<std::string>{"y"});
    CHECK(agg->conds[0]->kind == FKind::Atom); // child(x,y) is sugar for E(x,y)
    CHECK(agg->free_vars == std::vector<std::string>{"x"});

    CHECK(parse_formula("not(E(x,y))", opts)->kind == FKind::Conn);
    CHECK(parse_formula("exists y (E(x,y))", opts)->sym == "max");
    CHECK(parse_formula("forall y (E(x,y))", opts)->sym == "min");

    CHECK_ERRC(parse_formula("0.5 +", opts), Errc::SyntaxError);
    CHECK_ERRC(parse_formula("Q(x)", opts), Errc::UnknownSymbol);
    CHECK_ERRC(parse_formula("P(x,y)", opts), Errc::ArityMismatch);
    CHECK_ERRC(parse_formula("am(am(P(y) : y : T) : y : T)", opts), Errc::RebindingBoundVar);
    CHECK_ERRC(parse_formula("exists y (max(P(y) : y : T))", opts), Errc::RebindingBoundVar);
}

TEST_CASE("closure-type macros parse to canonical types") {
    Signature sig = sig_ub();
    ParseOptions opts;
    opts.sig = &sig;

    FormulaPtr croot = parse_formula("childofroot(x)", opts);
    REQUIRE(croot->kind == FKind::Type);
    CHECK(croot->type->type.num_outer == 1);
    CHECK(croot->type->type.num_vars() == 2);
    CHECK(croot->type->type.var_level(0) == 1);

    // the same type via the raw macro
    FormulaPtr raw = parse_formula("closed{E(_r,x)}", opts);
    REQUIRE(raw->kind == FKind::Type);
    CHECK(raw->type->type == croot->type->type);

    FormulaPtr lvl = parse_formula("atlevel(x,2)", opts);
    CHECK(lvl->type->type.num_vars() == 3);

    // round trip through display
    FormulaPtr p = parse_formula("closed{E(_r,x); E(x,y); P(x); !P(y)}", opts);
    FormulaPtr again = parse_formula(p->str(), opts);
    CHECK(formula_equal(*p, *again));

    // contradictory macro
    CHECK_ERRC(parse_formula("closed{E(x,y); E(y,x)}", opts), Errc::SyntaxError);
    // existential with no outer descendant
    CHECK_ERRC(parse_formula("closed{x; E(x,_1)}", opts), Errc::SyntaxError);
}

TEST_CASE("evaluate: worked examples") {
    SigmaStructure A = tiny_structure();
    Signature s = A.sig();
    ParseOptions opts;
    opts.sig = &s;

    CHECK(evaluate(A, *parse_formula("implies(0.8, 0.5)", opts)).rat() == Rational(7, 10));

    // am over the two children of the root where R holds for exactly one
    Value v = evaluate(A, *parse_formula("am(R(y) : y : childofroot(y))", opts));
    CHECK(v.rat() == Rational(1, 2));

    // unsatisfiable conditioning set gives 0
    Value zero = evaluate(A, *parse_formula("am(R(y) : y : F)", opts));
    CHECK(zero.rat() == 0);

    // gm of a constant sequence, lengthpow, noisy-or
    CHECK(evaluate(A, *parse_formula("gm(0.25 : y : T)", opts)).rat() == Rational(1, 4));
    CHECK(evaluate(A, *parse_formula("lengthpow(x = x : y : T)", opts), {{"x", 0}}).rat() ==
          Rational(1, 3));
    const auto& reg = Registry::builtin();
    Value nor = reg.aggregation("noisyor")->fn({{Value::exact(Rational(1, 2)), Value::exact(Rational(1, 2))}});
    CHECK(nor.rat() == Rational(3, 4));

    CHECK_ERRC(evaluate(A, *parse_formula("P(x)", ParseOptions{}), {{"x", 0}}),
               Errc::SignatureMismatch);
    CHECK_ERRC(evaluate(A, *parse_formula("R(y)", opts)), Errc::UnboundVariable);
}

TEST_CASE("type conditions evaluate exactly like their expansions") {
    std::mt19937_64 rng(2024);
    Signature sig = sig_ub();
    ParseOptions opts;
    opts.sig = &sig;
    FormulaPtr type_f = parse_formula("closed{E(_r,x); E(x,y); P(y)}", opts);
    FormulaPtr plain = type_to_plain_formula(type_f->type->type, type_f->type->outer);
    for (int trial = 0; trial < 40; ++trial) {
        auto tree = std::make_shared<Tree>(gen::random_tree(rng, 7, 3));
        SigmaStructure A = gen::random_structure(tree, sig, rng);
        for (int a = 0; a < tree->size(); ++a)
            for (int b = 0; b < tree->size(); ++b) {
                Valuation v{{"x", a}, {"y", b}};
                CHECK(evaluate(A, *type_f, v).rat() == evaluate(A, *plain, v).rat());
            }
    }
}

TEST_CASE("evaluate agrees with the straight-from-the-definition reference") {
    std::mt19937_64 rng(42);
    Signature sig = sig_ub();
    int agreements = 0;
    for (int trial = 0; trial < 300; ++trial) {
        auto tree = std::make_shared<Tree>(gen::random_tree(rng, 7, 2));
        SigmaStructure A = gen::random_structure(tree, sig, rng);
        FormulaPtr f = gen::random_formula(sig, rng, 3, {"u", "v"});
        Valuation val;
        std::map<std::string, int> env;
        for (const auto& name : f->needed_vars) {
            int node = static_cast<int>(rng() % tree->size());
            val[name] = node;
            env[name] = node;
        }
        Value impl = evaluate(A, *f, val);
        refeval::RefVal ref = refeval::ref_evaluate(A, *f, env);
        CHECK(refeval::values_agree(impl, ref));
        ++agreements;
    }
    CHECK(agreements == 300);
}

TEST_CASE("truth values only depend on the symbols used (reduct lemma)") {
    std::mt19937_64 rng(5);
    Signature big = sig_ub();
    Signature small;
    small.add("P", 1);
    for (int trial = 0; trial < 60; ++trial) {
        auto tree = std::make_shared<Tree>(gen::random_tree(rng, 6, 2));
        SigmaStructure A = gen::random_structure(tree, big, rng);
        SigmaStructure Ared = A.reduct(small);
        FormulaPtr f = gen::random_formula(small, rng, 3, {"u"});
        Valuation v;
        for (const auto& name : f->needed_vars) v[name] = static_cast<int>(rng() % tree->size());
        Value a = evaluate(A, *f, v);
        Value b = evaluate(Ared, *f, v);
        CHECK(a.is_exact() == b.is_exact());
        if (a.is_exact())
            CHECK(a.rat() == b.rat());
        else
            CHECK(a.dbl() == doctest::Approx(b.dbl()).epsilon(1e-12));
    }
}

TEST_CASE("evaluation stays in [0,1] and 0/1 fragments stay exact") {
    std::mt19937_64 rng(99);
    Signature sig = sig_ub();
    for (int trial = 0; trial < 200; ++trial) {
        auto tree = std::make_shared<Tree>(gen::random_tree(rng, 6, 2));
        SigmaStructure A = gen::random_structure(tree, sig, rng);
        FormulaPtr f = gen::random_formula(sig, rng, 3, {"u"});
        Valuation v;
        for (const auto& name : f->needed_vars) v[name] = static_cast<int>(rng() % tree->size());
        double d = evaluate(A, *f, v).dbl();
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
    }
    // FO embeddings evaluate to exact 0/1
    for (int trial = 0; trial < 100; ++trial) {
        auto tree = std::make_shared<Tree>(gen::random_tree(rng, 5, 2));
        SigmaStructure A = gen::random_structure(tree, sig, rng);
        FoPtr fo = gen::random_fo(sig, rng, 2, {"u"});
        FormulaPtr f = embed_fo(fo);
        Valuation v;
        for (const auto& name : f->needed_vars) v[name] = static_cast<int>(rng() % tree->size());
        Value x = evaluate(A, *f, v);
        CHECK(x.is_exact());
        CHECK((x.rat() == 0 || x.rat() == 1));
    }
}

TEST_CASE("FO embedding agrees with the brute-force checker") {
    std::mt19937_64 rng(314);
    Signature sig = sig_ub();

    // the two worked examples on a root with two children
    auto tree = std::make_shared<Tree>(Tree::from_parents({std::nullopt, 0, 0}));
    SigmaStructure A(tree, sig);
    FormulaPtr ex = embed_fo(fo_exists("y", fo_atom("E", {"x", "y"})));
    CHECK(evaluate(A, *ex, {{"x", 0}}).rat() == 1);
    FormulaPtr noparent = embed_fo(fo_forall("y", fo_not(fo_atom("E", {"y", "x"}))));
    CHECK(evaluate(A, *noparent, {{"x", 0}}).rat() == 1);
    CHECK(evaluate(A, *noparent, {{"x", 1}}).rat() == 0);

    int n = 0;
    for (int trial = 0; trial < 300; ++trial) {
        auto t = std::make_shared<Tree>(gen::random_tree(rng, 5, 2));
        SigmaStructure B = gen::random_structure(t, sig, rng);
        FoPtr fo = gen::random_fo(sig, rng, 3, {"u"});
        FormulaPtr f = embed_fo(fo);
        std::map<std::string, int> env;
        Valuation v;
        for (const auto& name : f->needed_vars) {
            int node = static_cast<int>(rng() % t->size());
            env[name] = node;
            v[name] = node;
        }
        bool expect = fo_oracle::holds(B, *fo, env);
        CHECK(evaluate(B, *f, v).rat() == (expect ? 1 : 0));
        ++n;
    }
    CHECK(n == 300);
}

TEST_CASE("aggregation symmetry: enumeration order does not matter") {
    // the registry evaluations are symmetric by construction; spot-check by
    // permuting sequences
    std::mt19937_64 rng(8);
    const auto& reg = Registry::builtin();
    for (const auto& agg : reg.aggregations()) {
        std::vector<Value> seq;
        for (int i = 0; i < 7; ++i) seq.push_back(Value::exact(Rational(static_cast<int>(rng() % 5), 4)));
        Value a = agg->fn({seq});
        std::shuffle(seq.begin(), seq.end(), rng);
        Value b = agg->fn({seq});
        CHECK(a.dbl() == doctest::Approx(b.dbl()).epsilon(1e-15));
    }
}

TEST_CASE("ct probes: witnesses and convergence") {
    const auto& reg = Registry::builtin();
    std::vector<long long> lengths{100, 1000, 10000};

    // max separates the two sides at the zero-weight cluster
    auto res = ct_probe(*reg.aggregation("max"),
                        {{{Rational(0), Rational(1)}, {Rational(1), Rational(0)}}}, 4, lengths, 1);
    CHECK(res.max_discrepancy >= 0.99);

    // am converges under any parameters
    auto am = ct_probe(*reg.aggregation("am"),
                       {{{Rational(1, 4), Rational(1, 2)}, {Rational(3, 4), Rational(1, 2)}}}, 4,
                       lengths, 2);
    CHECK(am.max_discrepancy <= 0.02);
    CHECK(*am.max_limit_gap <= 0.02);
    // am limit: sum alpha_j c_j = 1/2
    CHECK(reg.aggregation("am")
              ->ct_limit({{{Rational(1, 4), Rational(1, 2)}, {Rational(3, 4), Rational(1, 2)}}})
              .rat() == Rational(1, 2));

    // length^-1 depends on the length only
    auto len = ct_probe(*reg.aggregation("lengthpow"), {{{Rational(1, 2), Rational(1)}}}, 4,
                        lengths, 3);
    CHECK(len.max_discrepancy == 0.0);

    CHECK_ERRC(ct_probe(*reg.aggregation("am"), {{{Rational(1, 2), Rational(1, 2)}}}, 4, lengths, 1),
               Errc::BadParameters);
    CHECK_ERRC(ct_probe(*reg.aggregation("am"), {{{Rational(1, 2), Rational(1)}}}, 4, {10, 10}, 1),
               Errc::BadParameters);
}

TEST_CASE("the registry battery passes") {
    BatteryResult res = check_battery();
    for (const auto& row : res.rows) {
        INFO(row.function, " ", row.probe, " measured=", row.measured);
        CHECK(row.pass);
    }
    CHECK(res.all_pass);
}
