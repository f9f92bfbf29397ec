#pragma once

#include "pla/signature.hpp"
#include "pla/structure.hpp"
#include "pla/value.hpp"

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pla {

// Canonical closure type over sigma with respect to trees of bounded height.
//
// Variables 0..num_outer-1 are the outer variables in formula order; the
// remaining ones are existential closure witnesses in canonical order (BFS
// over the variable tree, siblings ordered by least outer descendant).
// Invariants:
//   - the variable set is exactly the closure of the outer variables, so
//     `parent` forms a tree whose root variable denotes the tree root;
//   - variables are pairwise distinct; E holds exactly along parent edges;
//   - every existential variable has an outer descendant (or the type is the
//     single-root-variable sentence type for an empty outer sequence).
// Two types are logically equivalent iff their canonical keys are equal.
struct ClosureType {
    int num_outer = 0;
    std::vector<int> parent; // var -> parent var, -1 at the root variable
    Signature sig;
    // polarity of sigma\tau literals; key = variable index tuple; complete
    // types assign every tuple of every relation
    std::vector<std::map<std::vector<int>, bool>> lits;

    static ClosureType make(int num_outer, std::vector<int> parent, Signature sig,
                            std::vector<std::map<std::vector<int>, bool>> lits);

    int num_vars() const { return static_cast<int>(parent.size()); }
    int num_exist() const { return num_vars() - num_outer; }
    int root_var() const;
    int var_level(int v) const;
    int height() const;
    bool complete() const;

    std::string key() const;
    std::string display(const std::vector<std::string>& outer_names = {}) const;

    bool operator==(const ClosureType& o) const { return key() == o.key(); }

    // ancestor-or-self closure of a set of variables, as a sorted var list
    std::vector<int> var_closure(const std::vector<int>& vars) const;
};

// restriction to a sub-signature (drops literals of dropped symbols)
ClosureType restrict_sig(const ClosureType& p, const Signature& sub);

// restriction to a subsequence of the outer variables (distinct positions)
ClosureType restrict_vars(const ClosureType& p, const std::vector<int>& outer_sel);

// the self-contained transform: existential witnesses promoted to outer
// variables, appended after the original outer sequence; second component is
// the number of added variables
std::pair<ClosureType, int> self_contained_transform(const ClosureType& p);

// rank of the outer-variable suffix of length `suffix_len`:
// |cl(suffix) \ cl(prefix)| in any realization; depends only on the tau part
int rank_over_suffix(const ClosureType& p, int suffix_len);

bool is_y_independent(const ClosureType& p, int suffix_len);

enum class Positivity { Positive, Unknown };
// decidable fragment: over tau, or rank 0
Positivity y_positivity(const ClosureType& p, int suffix_len);

struct DecomposeStep {
    int pivot;        // outer position within the suffix-bearing type
    ClosureType q;    // restriction to prefix + pivot, rank 1 over the pivot
    std::vector<int> remainder; // remaining suffix positions
};
// One decomposition step of a self-contained, suffix-independent type with
// rank >= 2: the pivot is a suffix variable that is a child of a member of
// the prefix closure. Errors with NotDecomposable if the precondition fails.
DecomposeStep decompose_rank_step(const ClosureType& p, int suffix_len);

// full pivot chain (rank many steps) in deterministic order
std::vector<int> decompose_chain(const ClosureType& p, int suffix_len);

bool satisfies(const ClosureType& p, const SigmaStructure& A, std::span<const int> outer_nodes);

// Enumerate assignments of the free outer positions (those with -1 in
// `assignment`) such that the type is satisfied. Yields the full outer
// assignment; enumeration is in ascending node order per free position.
void enumerate_witnesses(const ClosureType& p, const SigmaStructure& A,
                         const std::vector<int>& assignment,
                         const std::function<void(const std::vector<int>&)>& yield);

// A witness realization: a structure built from the type itself plus the
// outer tuple satisfying it. Checked back by `satisfies` in tests.
std::pair<SigmaStructure, std::vector<int>> witness(const ClosureType& p);

// conjunction of two types with the same outer arity over the signature of
// `a`; nullopt when skeletons differ or literals conflict
std::optional<ClosureType> conjoin(const ClosureType& a, const ClosureType& b);

// does `ext` extend `base`: same skeleton, ext's literals contain base's
bool extends(const ClosureType& ext, const ClosureType& base);

// The closure-basic normal form /\ (p_i(xbar) -> c_i) with complete pairwise
// inconsistent types: value c_i on the unique satisfied p_i, else 1.
struct ClosureBasicFormula {
    std::vector<std::string> outer_vars;
    std::vector<std::pair<ClosureType, Value>> cases;

    Value eval(const SigmaStructure& A, std::span<const int> outer_nodes) const;
    const Value* value_at(const ClosureType& complete_type) const; // by canonical key
    std::string display() const;
};

} // namespace pla
