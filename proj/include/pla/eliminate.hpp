#pragma once

#include "pla/catalog.hpp"
#include "pla/distribution.hpp"
#include "pla/network.hpp"
#include "pla/tree.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace pla {

struct Provenance {
    enum class Kind { ExactProduct, MonteCarlo } kind = Kind::ExactProduct;
    long long ref_n = 0; // MC reference tree scale
    long long samples = 0;
    double se = 0.0;
    std::string str() const;
};

// limit of P(E^p | E^base) under the induced distributions
struct ConvergenceConstant {
    ClosureType p, base;
    Value value;
    Provenance prov;
    bool eventually_constant = false;
    bool vacuous = false; // p and base never co-satisfiable
};

// limit of |p(a,A) cap chi(a,A)| / |chi(a,A)| over worlds satisfying q(a)
struct BalanceConstant {
    ClosureType p, chi, q;
    Value value;
    Provenance prov;
};

struct EliminationOptions {
    int delta = 2;
    bool mc_fallback = false;   // allow Monte Carlo constants for non-closure-basic networks
    long long mc_samples = 300;
    long long mc_n = 8;         // reference scale for MC constants
    uint64_t seed = 1;
    CatalogOptions catalog;
};

struct AggCase {
    std::string outer_type;
    std::vector<std::pair<std::string, std::string>> params; // (c, alpha)
    std::string limit;
};

struct AggLedgerEntry {
    std::string agg;
    std::string cls;
    std::vector<int> ranks; // per conditioning slot
    std::vector<AggCase> cases;
};

struct EliminationReport {
    std::string input;
    std::string output;
    std::vector<AggLedgerEntry> ledger;
    std::vector<std::string> constants;
    std::vector<std::string> warnings;
    std::string to_json() const; // deterministic: same inputs, same bytes
};

struct EliminationResult {
    ClosureBasicFormula cbf;
    EliminationReport report;
};

// Rewrites phi into an asymptotically equivalent closure-basic formula over
// the network's signature. Aggregations must condition on closure types (or
// tree-edge atoms resolvable against the outer type) in the positive
// fragment; continuous aggregation functions are always eliminable,
// admissible ones when every conditioning rank is 0 or the network is
// closure-basic. Exact constants require a closure-basic network unless
// mc_fallback is set.
EliminationResult eliminate(const Network& net, const FormulaPtr& phi,
                            const EliminationOptions& opts);

ConvergenceConstant convergence_constant(const Network& net, const ClosureType& p,
                                         const ClosureType& base, const EliminationOptions& opts);

BalanceConstant balance_constant(const Network& net, const ClosureType& p, const ClosureType& chi,
                                 const ClosureType& q, const EliminationOptions& opts);

struct EquivalenceCheck {
    struct Row {
        long long n = 0;
        double fraction = 0.0; // samples where sup_a |phi - psi| <= eps
        double mean_sup = 0.0;
    };
    std::vector<Row> rows;
    bool subsampled = false; // tuples subsampled (|xbar| >= 2 or huge trees)
};

EquivalenceCheck check_asymptotic_equivalence(const Network& net, const FormulaPtr& phi,
                                              const FormulaPtr& psi,
                                              const std::function<TreeGenConfig(long long)>& family,
                                              const std::vector<long long>& ns, long long samples,
                                              double eps, uint64_t seed);

} // namespace pla
