#pragma once

#include "pla/formula.hpp"

#include <memory>
#include <string>
#include <vector>

namespace pla {

struct FoFormula;
using FoPtr = std::shared_ptr<const FoFormula>;

enum class FoKind { Atom, Eq, Not, And, Or, Implies, Exists, Forall };

// Plain first-order formula over a relational signature.
struct FoFormula {
    FoKind kind;
    std::string sym;                // Atom
    std::vector<std::string> vars;  // Atom args / Eq sides
    std::string qvar;               // Exists/Forall
    std::vector<FoPtr> args;
};

FoPtr fo_atom(std::string rel, std::vector<std::string> vars);
FoPtr fo_eq(std::string a, std::string b);
FoPtr fo_not(FoPtr a);
FoPtr fo_and(FoPtr a, FoPtr b);
FoPtr fo_or(FoPtr a, FoPtr b);
FoPtr fo_implies(FoPtr a, FoPtr b);
FoPtr fo_exists(std::string v, FoPtr a);
FoPtr fo_forall(std::string v, FoPtr a);

std::string fo_str(const FoFormula& f);

// 0/1-valued PLA* formula agreeing with first-order satisfaction on every
// finite structure: existential quantifiers become max aggregations over the
// trivial condition, universal ones become min.
FormulaPtr embed_fo(const FoPtr& fo);

} // namespace pla
