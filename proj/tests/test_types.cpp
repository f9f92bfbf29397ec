#include <doctest.h>

#include "pla/catalog.hpp"
#include "pla/evaluate.hpp"
#include "pla/parser.hpp"
#include "support/checks.hpp"
#include "support/gen.hpp"

#include <random>
#include <set>

using namespace pla;

namespace {

Signature sig_p() {
    Signature s;
    s.add("P", 1);
    return s;
}

ClosureType parse_type(const std::string& text, const Signature& sig) {
    ParseOptions opts;
    opts.sig = &sig;
    FormulaPtr f = parse_formula(text, opts);
    REQUIRE(f->kind == FKind::Type);
    return f->type->type;
}

// all expansions of the tree by the unary symbol P
std::vector<SigmaStructure> all_p_expansions(TreePtr tree) {
    std::vector<SigmaStructure> out;
    for (uint64_t mask = 0; mask < (1ull << tree->size()); ++mask) {
        SigmaStructure A(tree, sig_p());
        for (int v = 0; v < tree->size(); ++v)
            if ((mask >> v) & 1) A.set(0, std::vector<int>{v}, true);
        out.push_back(std::move(A));
    }
    return out;
}

} // namespace

TEST_CASE("catalog sizes match hand enumeration") {
    // over tau in one variable, height <= 1: the root, or a child of the root
    auto tau1 = enumerate_complete_closure_types(Signature{}, 1, 1);
    CHECK(tau1->size() == 2);

    // adding one unary symbol: P-patterns over each position's closure.
    // x = root: closure {x}, 2 patterns; x = child of the root: closure
    // {root, x}, 4 patterns. Cross-checked by the exhaustive partition test
    // below, which would report uncovered tuples if a type were missing.
    auto p1 = enumerate_complete_closure_types(sig_p(), 1, 1);
    CHECK(p1->size() == 6);

    // empty variable sequence: the root's description
    auto root_types = enumerate_complete_closure_types(sig_p(), 0, 2);
    CHECK(root_types->size() == 2);

    // over tau, two variables, height 1: hand count
    // shapes: x1=root,x2 child; x2=root,x1 child; both children (distinct)
    auto tau2 = enumerate_complete_closure_types(Signature{}, 2, 1);
    CHECK(tau2->size() == 3);

    CHECK_ERRC(enumerate_complete_closure_types(Signature{}, 4, 3), Errc::TooManyVariables);
}

TEST_CASE("every enumerated type is satisfiable via its own witness") {
    for (int k = 0; k <= 2; ++k) {
        auto catalog = enumerate_complete_closure_types(sig_p(), k, 2);
        for (const auto& t : *catalog) {
            auto [A, tuple] = witness(t);
            CHECK(satisfies(t, A, tuple));
            // and the expanded formula agrees
            std::vector<std::string> names;
            for (int i = 0; i < k; ++i) names.push_back("x" + std::to_string(i + 1));
            FormulaPtr plain = type_to_plain_formula(t, names);
            Valuation v;
            for (int i = 0; i < k; ++i) v[names[i]] = tuple[i];
            CHECK(evaluate(A, *plain, v).rat() == 1);
        }
    }
}

TEST_CASE("completeness partition: exactly one type per injective tuple") {
    auto catalog1 = enumerate_complete_closure_types(sig_p(), 1, 2);
    auto catalog2 = enumerate_complete_closure_types(sig_p(), 2, 2);
    for (const Tree& t : gen::all_trees(6, 2)) {
        auto tree = std::make_shared<Tree>(t);
        for (const auto& A : all_p_expansions(tree)) {
            for (int a = 0; a < tree->size(); ++a) {
                int hits = 0;
                for (const auto& q : *catalog1)
                    if (satisfies(q, A, std::vector<int>{a})) ++hits;
                CHECK(hits == 1);
            }
            for (int a = 0; a < tree->size(); ++a)
                for (int b = 0; b < tree->size(); ++b) {
                    if (a == b) continue;
                    int hits = 0;
                    for (const auto& q : *catalog2)
                        if (satisfies(q, A, std::vector<int>{a, b})) ++hits;
                    CHECK(hits == 1);
                }
        }
    }
}

TEST_CASE("canonicalization is stable under re-presentation") {
    std::mt19937_64 rng(3);
    auto catalog = enumerate_complete_closure_types(sig_p(), 2, 2);
    for (const auto& t : *catalog) {
        // permute the existential variables and rebuild
        std::vector<int> perm(t.num_vars());
        for (int i = 0; i < t.num_vars(); ++i) perm[i] = i;
        std::shuffle(perm.begin() + t.num_outer, perm.end(), rng);
        std::vector<int> inv(t.num_vars());
        for (int i = 0; i < t.num_vars(); ++i) inv[perm[i]] = i;
        (void)inv;
        std::vector<int> remap(t.num_vars());
        for (int i = 0; i < t.num_outer; ++i) remap[i] = i;
        for (int i = t.num_outer; i < t.num_vars(); ++i) remap[i] = perm[i];
        std::vector<int> parent(t.num_vars(), -1);
        for (int v = 0; v < t.num_vars(); ++v)
            if (t.parent[v] >= 0)
                parent[remap[v]] = remap[t.parent[v]];
        std::vector<std::map<std::vector<int>, bool>> lits(t.sig.size());
        for (int r = 0; r < t.sig.size(); ++r)
            for (const auto& [tuple, pol] : t.lits[r]) {
                std::vector<int> mapped(tuple.size());
                for (size_t i = 0; i < tuple.size(); ++i) mapped[i] = remap[tuple[i]];
                lits[r][mapped] = pol;
            }
        ClosureType re = ClosureType::make(t.num_outer, parent, t.sig, lits);
        CHECK(re.key() == t.key());
    }
}

TEST_CASE("restriction: identity, reducts, and commutation") {
    Signature sp = sig_p();
    ClosureType p = parse_type("closed{E(_r,x); E(x,y); P(x); !P(y); !P(_r)}", sp);

    CHECK(restrict_sig(p, sp) == p);
    ClosureType tau = restrict_sig(p, Signature{});
    for (const auto& m : tau.lits) CHECK(m.empty());
    CHECK(tau.complete()); // closure types over tau are complete

    // restrict to x then to tau == restrict to tau then to x
    ClosureType a = restrict_sig(restrict_vars(p, {0}), Signature{});
    ClosureType b = restrict_vars(restrict_sig(p, Signature{}), {0});
    CHECK(a == b);

    // exhaustive commutation over the two-variable catalog
    auto catalog = enumerate_complete_closure_types(sp, 2, 2);
    for (const auto& t : *catalog) {
        CHECK(restrict_sig(restrict_vars(t, {0}), Signature{}) ==
              restrict_vars(restrict_sig(t, Signature{}), {0}));
        CHECK(restrict_sig(restrict_vars(t, {1}), Signature{}) ==
              restrict_vars(restrict_sig(t, Signature{}), {1}));
    }
}

TEST_CASE("self-contained transform: identity, witnesses, counts") {
    Signature sp = sig_p();
    // already self-contained
    ClosureType sc = parse_type("closed{x; P(x)}", sp);
    auto [sc2, added0] = self_contained_transform(sc);
    CHECK(added0 == 0);
    CHECK(sc2 == sc);

    // x child of the root: the root becomes an explicit variable
    ClosureType child = parse_type("childofroot(x)", sp);
    auto [star, added1] = self_contained_transform(child);
    CHECK(added1 == 1);
    CHECK(star.num_outer == 2);
    CHECK(star.num_exist() == 0);

    // |p(a, A)| = |p*(a, ., A)| by brute-force counting on uniform(2,3)
    auto tree = std::make_shared<Tree>(Tree::generate(TreeGenConfig::uniform(2, 3)));
    std::mt19937_64 rng(17);
    SigmaStructure A = gen::random_structure(tree, sp, rng);
    auto catalog = enumerate_complete_closure_types(sp, 1, 2);
    for (const auto& t : *catalog) {
        auto [tsc, add] = self_contained_transform(t);
        (void)add;
        long long count_p = 0, count_star = 0;
        for (int a = 0; a < tree->size(); ++a)
            if (satisfies(t, A, std::vector<int>{a})) ++count_p;
        std::vector<int> assign(tsc.num_outer, -1);
        enumerate_witnesses(tsc, A, assign, [&](const std::vector<int>&) { ++count_star; });
        CHECK(count_p == count_star);
        CHECK(tsc.complete() == t.complete());
    }
}

TEST_CASE("rank: worked examples and tau-invariance") {
    Signature sp = sig_p();
    // x child of root, y child of x: the y-suffix contributes one element
    ClosureType p = parse_type("closed{E(_r,x); E(x,y)}", sp);
    CHECK(rank_over_suffix(p, 1) == 1);
    CHECK(is_y_independent(p, 1));

    // y the parent of x (x on level 2): rank 0, not independent; the bare
    // declaration pins the outer order to (x, y)
    ClosureType q = parse_type("closed{x; E(_r,y); E(y,x)}", sp);
    CHECK(rank_over_suffix(q, 1) == 0);
    CHECK_FALSE(is_y_independent(q, 1));

    // empty prefix: y1 child of root, y2 child of y1 -> rank 2
    ClosureType r = parse_type("closed{E(_r,y1); E(y1,y2)}", sp);
    CHECK(rank_over_suffix(r, 2) == 2);

    // rank depends only on the tau part
    auto catalog = enumerate_complete_closure_types(sp, 2, 2);
    for (const auto& t : *catalog)
        CHECK(rank_over_suffix(t, 1) == rank_over_suffix(restrict_sig(t, Signature{}), 1));
}

TEST_CASE("decomposition: pivots, chains, and the precondition") {
    Signature sp = sig_p();
    // x fixed at the root, two stacked children below: rank 2
    ClosureType p = parse_type("closed{x; E(x,y1); E(y1,y2)}", sp);
    REQUIRE(p.num_exist() == 0);
    CHECK(rank_over_suffix(p, 2) == 2);
    DecomposeStep step = decompose_rank_step(p, 2);
    CHECK(step.pivot == 1); // y1, the child of x
    CHECK(rank_over_suffix(step.q, 1) == 1);
    CHECK(step.remainder == std::vector<int>{2});

    // rank-1 input: precondition fails
    ClosureType one = parse_type("closed{x; E(x,y)}", sp);
    CHECK_ERRC(decompose_rank_step(one, 1), Errc::NotDecomposable);

    // every self-contained independent catalog type decomposes in rank steps
    auto catalog = enumerate_complete_closure_types(sp, 3, 2, CatalogOptions{9, 22});
    int checked = 0;
    for (const auto& t : *catalog) {
        if (t.num_exist() != 0) continue;
        for (int m = 1; m <= 2; ++m) {
            if (!is_y_independent(t, m)) continue;
            int r = rank_over_suffix(t, m);
            if (r != m) continue;
            auto chain = decompose_chain(t, m);
            CHECK(static_cast<int>(chain.size()) == r);
            ++checked;
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("positivity is decided exactly on the licensed fragment") {
    Signature sp = sig_p();
    // over tau: positive regardless of rank
    CHECK(y_positivity(parse_type("closed{E(_r,x); E(x,y)}", Signature{}), 1) ==
          Positivity::Positive);
    // rank 0 with non-tree literals: positive
    CHECK(y_positivity(parse_type("closed{x; E(_r,y); E(y,x); P(y)}", sp), 1) ==
          Positivity::Positive);
    // positive rank with non-tree literals: unknown
    CHECK(y_positivity(parse_type("closed{E(_r,x); E(x,y); P(y)}", sp), 1) == Positivity::Unknown);
}

TEST_CASE("witness enumeration equals brute-force satisfaction") {
    std::mt19937_64 rng(23);
    Signature sp = sig_p();
    auto catalog = enumerate_complete_closure_types(sp, 2, 2);
    for (int trial = 0; trial < 25; ++trial) {
        auto tree = std::make_shared<Tree>(gen::random_tree(rng, 7, 2));
        SigmaStructure A = gen::random_structure(tree, sp, rng);
        const ClosureType& t = (*catalog)[rng() % catalog->size()];
        // fix the first variable, enumerate the second
        for (int a = 0; a < tree->size(); ++a) {
            std::set<std::vector<int>> fast;
            enumerate_witnesses(t, A, {a, -1},
                                [&](const std::vector<int>& w) { fast.insert(w); });
            std::set<std::vector<int>> brute;
            for (int b = 0; b < tree->size(); ++b)
                if (satisfies(t, A, std::vector<int>{a, b})) brute.insert({a, b});
            CHECK(fast == brute);
        }
    }
}

TEST_CASE("conjoin and extends behave like conjunction") {
    Signature sp = sig_p();
    ClosureType base = parse_type("closed{E(_r,x); E(x,y)}", sp);
    ClosureType withp = parse_type("closed{E(_r,x); E(x,y); P(y)}", sp);
    ClosureType withnp = parse_type("closed{E(_r,x); E(x,y); !P(y)}", sp);

    CHECK(extends(withp, base));
    CHECK_FALSE(extends(base, withp));
    CHECK(conjoin(withp, base).has_value());
    CHECK_FALSE(conjoin(withp, withnp).has_value()); // literal conflict

    ClosureType other_shape = parse_type("closed{x; y; E(_r,y); E(y,x)}", sp);
    CHECK_FALSE(conjoin(base, other_shape).has_value()); // different skeletons

    auto catalog = enumerate_complete_closure_types(sp, 2, 2);
    auto exts = complete_extensions(base, *catalog);
    // closure has 3 elements; P free on each: 8 completions
    CHECK(exts.size() == 8);
}
