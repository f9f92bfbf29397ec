#pragma once

#include "pla/formula.hpp"
#include "pla/registry.hpp"
#include "pla/signature.hpp"

#include <string>

namespace pla {

struct ParseOptions {
    const Signature* sig = nullptr;     // validate relation symbols when present
    const Registry* registry = nullptr; // defaults to Registry::builtin()
};

// Grammar (informal):
//   formula := NUMBER | 'T' | 'F' | VAR '=' VAR
//            | CONN '(' formula (',' formula)* ')'
//            | AGG '(' formula (',' formula)* ':' VAR+ ':' formula (',' formula)* ')'
//            | 'lengthpow' '(' NUMBER ')' '(' ... aggregation body ... ')'
//            | 'exists' VAR+ '(' formula ')' | 'forall' VAR+ '(' formula ')'
//            | 'closed' '{' item (';' item)* '}'          closure-type macro
//            | 'root(v)' | 'childofroot(v)' | 'atlevel(v,l)' | 'child(u,v)'
//            | 'cbf' '(' type '->' NUMBER ('|' type '->' NUMBER)* ')'
//            | REL '(' VAR (',' VAR)* ')'
//   item    := VAR | ['!'] REL '(' VAR (',' VAR)* ')'
// In closure-type macros, variables starting with '_' are existential
// witnesses; unmentioned E pairs are negative.
FormulaPtr parse_formula(const std::string& text, const ParseOptions& opts = {});

} // namespace pla
