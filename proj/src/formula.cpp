#include "pla/formula.hpp"
#include "pla/errors.hpp"
#include "pla/registry.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace pla {

namespace {

std::vector<std::string> sorted_unique(std::set<std::string> s) {
    return std::vector<std::string>(s.begin(), s.end());
}

void collect(const Formula& f, std::set<std::string>& free, std::set<std::string>& needed) {
    switch (f.kind) {
    case FKind::Const:
        break;
    case FKind::Eq:
    case FKind::Atom:
        for (const auto& v : f.vars) {
            free.insert(v);
            needed.insert(v);
        }
        break;
    case FKind::Type:
        for (const auto& v : f.type->outer) {
            free.insert(v);
            needed.insert(v);
        }
        break;
    case FKind::Cbf:
        for (const auto& v : f.cbf->cbf.outer_vars) {
            free.insert(v);
            needed.insert(v);
        }
        break;
    case FKind::Conn:
        for (const auto& a : f.args) {
            free.insert(a->free_vars.begin(), a->free_vars.end());
            needed.insert(a->needed_vars.begin(), a->needed_vars.end());
        }
        break;
    case FKind::Agg: {
        // the aggregation binds ybar; conditioning formulas do not
        // contribute free variables but evaluation must cover theirs
        std::set<std::string> inner_free, inner_needed;
        for (const auto& a : f.args) {
            inner_free.insert(a->free_vars.begin(), a->free_vars.end());
            inner_needed.insert(a->needed_vars.begin(), a->needed_vars.end());
        }
        for (const auto& c : f.conds) inner_needed.insert(c->needed_vars.begin(), c->needed_vars.end());
        for (const auto& y : f.vars) {
            inner_free.erase(y);
            inner_needed.erase(y);
        }
        free.insert(inner_free.begin(), inner_free.end());
        needed.insert(inner_needed.begin(), inner_needed.end());
        break;
    }
    }
}

FormulaPtr finish(Formula f) {
    std::set<std::string> free, needed;
    collect(f, free, needed);
    f.free_vars = sorted_unique(std::move(free));
    f.needed_vars = sorted_unique(std::move(needed));
    std::set<std::string> binds;
    for (const auto& a : f.args) binds.insert(a->binds_below.begin(), a->binds_below.end());
    for (const auto& c : f.conds) binds.insert(c->binds_below.begin(), c->binds_below.end());
    if (f.kind == FKind::Agg) binds.insert(f.vars.begin(), f.vars.end());
    f.binds_below = sorted_unique(std::move(binds));
    return std::make_shared<Formula>(std::move(f));
}

} // namespace

FormulaPtr f_const(Rational c) {
    if (c < 0 || c > 1) fail(Errc::BadInput, "constants live in [0,1]");
    Formula f;
    f.kind = FKind::Const;
    f.value = std::move(c);
    return finish(std::move(f));
}

FormulaPtr f_true() { return f_const(Rational(1)); }
FormulaPtr f_false() { return f_const(Rational(0)); }

FormulaPtr f_eq(std::string a, std::string b) {
    Formula f;
    f.kind = FKind::Eq;
    f.vars = {std::move(a), std::move(b)};
    return finish(std::move(f));
}

FormulaPtr f_atom(std::string rel, std::vector<std::string> args) {
    if (args.empty()) fail(Errc::ArityMismatch, "atoms take at least one argument");
    Formula f;
    f.kind = FKind::Atom;
    f.sym = std::move(rel);
    f.vars = std::move(args);
    return finish(std::move(f));
}

FormulaPtr f_conn(std::shared_ptr<const Connective> c, std::vector<FormulaPtr> args) {
    if (!c) fail(Errc::UnknownSymbol, "null connective");
    if (c->arity >= 0 && static_cast<int>(args.size()) != c->arity)
        fail(Errc::ArityMismatch, c->name + " expects " + std::to_string(c->arity) + " arguments");
    if (args.empty()) fail(Errc::ArityMismatch, c->name + " needs at least one argument");
    Formula f;
    f.kind = FKind::Conn;
    f.sym = c->name;
    f.conn = std::move(c);
    f.args = std::move(args);
    return finish(std::move(f));
}

FormulaPtr f_agg(std::shared_ptr<const AggregationFunction> fn, std::vector<FormulaPtr> inner,
                 std::vector<std::string> bound, std::vector<FormulaPtr> conds) {
    if (!fn) fail(Errc::UnknownSymbol, "null aggregation function");
    if (inner.empty() || inner.size() != conds.size())
        fail(Errc::ArityMismatch, "aggregation needs matching inner and conditioning formulas");
    if (fn->arity >= 0 && static_cast<int>(inner.size()) != fn->arity)
        fail(Errc::ArityMismatch, fn->name + " aggregates " + std::to_string(fn->arity) + " sequences");
    if (bound.empty()) fail(Errc::BadParameters, "aggregation binds at least one variable");
    std::set<std::string> seen;
    for (const auto& y : bound)
        if (!seen.insert(y).second) fail(Errc::RebindingBoundVar, y + " bound twice");
    for (const auto& y : bound) {
        auto rebinds = [&](const FormulaPtr& g) {
            return std::binary_search(g->binds_below.begin(), g->binds_below.end(), y);
        };
        for (const auto& g : inner)
            if (rebinds(g)) fail(Errc::RebindingBoundVar, y + " is rebound inside the aggregation");
        for (const auto& g : conds)
            if (rebinds(g)) fail(Errc::RebindingBoundVar, y + " is rebound inside the aggregation");
    }
    Formula f;
    f.kind = FKind::Agg;
    f.sym = fn->name;
    f.agg = std::move(fn);
    f.args = std::move(inner);
    f.vars = std::move(bound);
    f.conds = std::move(conds);
    return finish(std::move(f));
}

FormulaPtr f_type(ClosureType t, std::vector<std::string> outer_names) {
    if (static_cast<int>(outer_names.size()) != t.num_outer)
        fail(Errc::BadInput, "type needs one name per outer variable");
    Formula f;
    f.kind = FKind::Type;
    auto tc = std::make_shared<TypeCond>();
    tc->type = std::move(t);
    tc->outer = std::move(outer_names);
    f.type = std::move(tc);
    return finish(std::move(f));
}

FormulaPtr f_cbf(ClosureBasicFormula cbf) {
    Formula f;
    f.kind = FKind::Cbf;
    auto c = std::make_shared<CbfCond>();
    c->cbf = std::move(cbf);
    f.cbf = std::move(c);
    return finish(std::move(f));
}

bool Formula::is_aggregation_free() const {
    if (kind == FKind::Agg) return false;
    for (const auto& a : args)
        if (!a->is_aggregation_free()) return false;
    for (const auto& c : conds)
        if (!c->is_aggregation_free()) return false;
    return true;
}

std::string Formula::str() const {
    std::ostringstream os;
    switch (kind) {
    case FKind::Const:
        os << rational_to_string(value);
        break;
    case FKind::Eq:
        os << vars[0] << " = " << vars[1];
        break;
    case FKind::Atom:
        os << sym << "(";
        for (size_t i = 0; i < vars.size(); ++i) {
            if (i) os << ",";
            os << vars[i];
        }
        os << ")";
        break;
    case FKind::Conn: {
        os << sym << "(";
        for (size_t i = 0; i < args.size(); ++i) {
            if (i) os << ", ";
            os << args[i]->str();
        }
        os << ")";
        break;
    }
    case FKind::Agg: {
        os << sym << "(";
        for (size_t i = 0; i < args.size(); ++i) {
            if (i) os << ", ";
            os << args[i]->str();
        }
        os << " : ";
        for (size_t i = 0; i < vars.size(); ++i) {
            if (i) os << " ";
            os << vars[i];
        }
        os << " : ";
        for (size_t i = 0; i < conds.size(); ++i) {
            if (i) os << ", ";
            os << conds[i]->str();
        }
        os << ")";
        break;
    }
    case FKind::Type:
        os << type->type.display(type->outer);
        break;
    case FKind::Cbf: {
        os << "cbf(";
        const auto& cases = cbf->cbf.cases;
        for (size_t i = 0; i < cases.size(); ++i) {
            if (i) os << " | ";
            os << cases[i].first.display(cbf->cbf.outer_vars) << " -> " << cases[i].second.str();
        }
        os << ")";
        break;
    }
    }
    return os.str();
}

bool formula_equal(const Formula& a, const Formula& b) {
    if (a.kind != b.kind || a.sym != b.sym || a.vars != b.vars) return false;
    if (a.kind == FKind::Const && a.value != b.value) return false;
    if (a.kind == FKind::Type &&
        (a.type->outer != b.type->outer || !(a.type->type == b.type->type)))
        return false;
    if (a.kind == FKind::Cbf) {
        const auto& ca = a.cbf->cbf;
        const auto& cb = b.cbf->cbf;
        if (ca.outer_vars != cb.outer_vars || ca.cases.size() != cb.cases.size()) return false;
        for (size_t i = 0; i < ca.cases.size(); ++i)
            if (!(ca.cases[i].first == cb.cases[i].first) || !(ca.cases[i].second == cb.cases[i].second))
                return false;
    }
    if (a.args.size() != b.args.size() || a.conds.size() != b.conds.size()) return false;
    for (size_t i = 0; i < a.args.size(); ++i)
        if (!formula_equal(*a.args[i], *b.args[i])) return false;
    for (size_t i = 0; i < a.conds.size(); ++i)
        if (!formula_equal(*a.conds[i], *b.conds[i])) return false;
    return true;
}

FormulaPtr type_to_plain_formula(const ClosureType& t, const std::vector<std::string>& outer_names) {
    const auto& reg = Registry::builtin();
    auto con = [&](const std::string& n) { return reg.connective(n); };
    auto name = [&](int v) -> std::string {
        if (v < t.num_outer) return outer_names.at(v);
        return "w" + std::to_string(v - t.num_outer + 1);
    };
    std::vector<FormulaPtr> conj;
    // E along parent edges, no E elsewhere, all variables distinct
    for (int v = 0; v < t.num_vars(); ++v)
        for (int u = 0; u < t.num_vars(); ++u) {
            if (u == v) continue;
            FormulaPtr e = f_atom(Signature::tree_symbol, {name(u), name(v)});
            conj.push_back(t.parent[v] == u ? e : f_conn(con("not"), {e}));
        }
    for (int v = 0; v < t.num_vars(); ++v)
        for (int u = v + 1; u < t.num_vars(); ++u)
            conj.push_back(f_conn(con("not"), {f_eq(name(u), name(v))}));
    for (int r = 0; r < t.sig.size(); ++r)
        for (const auto& [tuple, pol] : t.lits[r]) {
            std::vector<std::string> args;
            for (int v : tuple) args.push_back(name(v));
            FormulaPtr a = f_atom(t.sig.name(r), std::move(args));
            conj.push_back(pol ? a : f_conn(con("not"), {a}));
        }
    // closedness guard: forall z ((E(z,v1) or ... ) -> (z=v1 or ...))
    std::vector<FormulaPtr> hits, eqs;
    for (int v = 0; v < t.num_vars(); ++v) {
        hits.push_back(f_atom(Signature::tree_symbol, {"zc", name(v)}));
        eqs.push_back(f_eq("zc", name(v)));
    }
    FormulaPtr guard_body =
        f_conn(con("implies"), {f_conn(con("or"), std::move(hits)), f_conn(con("or"), std::move(eqs))});
    FormulaPtr guard = f_agg(reg.aggregation("min"), {std::move(guard_body)}, {"zc"}, {f_true()});
    conj.push_back(std::move(guard));
    FormulaPtr body = conj.size() == 1 ? conj[0] : f_conn(con("and"), std::move(conj));
    if (t.num_exist() == 0) return body;
    std::vector<std::string> bound;
    for (int v = t.num_outer; v < t.num_vars(); ++v) bound.push_back(name(v));
    return f_agg(reg.aggregation("max"), {std::move(body)}, std::move(bound), {f_true()});
}

std::vector<RelSym> mentioned_symbols(const Formula& f) {
    std::map<std::string, int> seen;
    std::function<void(const Formula&)> walk = [&](const Formula& g) {
        if (g.kind == FKind::Atom && g.sym != Signature::tree_symbol)
            seen.emplace(g.sym, static_cast<int>(g.vars.size()));
        auto note_type = [&](const ClosureType& t) {
            for (int r = 0; r < t.sig.size(); ++r)
                if (!t.lits[r].empty()) seen.emplace(t.sig.name(r), t.sig.arity(r));
        };
        if (g.kind == FKind::Type) note_type(g.type->type);
        if (g.kind == FKind::Cbf)
            for (const auto& c : g.cbf->cbf.cases) note_type(c.first);
        for (const auto& a : g.args) walk(*a);
        for (const auto& c : g.conds) walk(*c);
    };
    walk(f);
    std::vector<RelSym> out;
    for (auto& [n, a] : seen) out.push_back({n, a});
    return out;
}

} // namespace pla
