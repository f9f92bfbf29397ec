#pragma once

#include "pla/closure_type.hpp"
#include "pla/value.hpp"

#include <memory>
#include <string>
#include <vector>

namespace pla {

struct Connective;
struct AggregationFunction;
struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

enum class FKind { Const, Eq, Atom, Conn, Agg, Type, Cbf };

// A closure-type condition appearing as a formula: the type plus the names
// its outer positions are bound to.
struct TypeCond {
    ClosureType type;
    std::vector<std::string> outer;
};

struct CbfCond {
    ClosureBasicFormula cbf;
};

// PLA* formula. Immutable, shared subterms. Free variables follow the
// syntax definition: an aggregation's conditioning formulas do not
// contribute free variables, but evaluation still needs them bound, so
// `needed_vars` tracks the superset that a valuation must cover.
struct Formula {
    FKind kind = FKind::Const;
    Rational value;                          // Const
    std::string sym;                         // Atom: relation; Conn/Agg: registered name
    std::vector<std::string> vars;           // Eq: the two sides; Atom: arguments; Agg: bound ybar
    std::vector<FormulaPtr> args;            // Conn operands / Agg inner formulas
    std::vector<FormulaPtr> conds;           // Agg conditioning formulas
    std::shared_ptr<const Connective> conn;  // resolved for Conn
    std::shared_ptr<const AggregationFunction> agg; // resolved for Agg
    std::shared_ptr<const TypeCond> type;    // Type
    std::shared_ptr<const CbfCond> cbf;      // Cbf

    std::vector<std::string> free_vars;   // sorted
    std::vector<std::string> needed_vars; // sorted; free_vars plus conditioning extras
    std::vector<std::string> binds_below; // sorted; variables bound by inner aggregations

    bool is_aggregation_free() const;
    std::string str() const;
};

FormulaPtr f_const(Rational c);
FormulaPtr f_true();
FormulaPtr f_false();
FormulaPtr f_eq(std::string a, std::string b);
FormulaPtr f_atom(std::string rel, std::vector<std::string> args);
FormulaPtr f_conn(std::shared_ptr<const Connective> c, std::vector<FormulaPtr> args);
FormulaPtr f_agg(std::shared_ptr<const AggregationFunction> f, std::vector<FormulaPtr> inner,
                 std::vector<std::string> bound, std::vector<FormulaPtr> conds);
FormulaPtr f_type(ClosureType t, std::vector<std::string> outer_names);
FormulaPtr f_cbf(ClosureBasicFormula cbf);

bool formula_equal(const Formula& a, const Formula& b);

// fully expanded PLA* formula equivalent to the closure type: the literal
// conjunction under an existential prefix plus the closedness guard
FormulaPtr type_to_plain_formula(const ClosureType& t, const std::vector<std::string>& outer_names);

// list of relation symbols (by name, with arities) mentioned by the formula
std::vector<RelSym> mentioned_symbols(const Formula& f);

} // namespace pla
