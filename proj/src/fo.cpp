#include "pla/fo.hpp"
#include "pla/registry.hpp"

namespace pla {

namespace {
FoPtr mk(FoFormula f) { return std::make_shared<FoFormula>(std::move(f)); }
} // namespace

FoPtr fo_atom(std::string rel, std::vector<std::string> vars) {
    return mk({FoKind::Atom, std::move(rel), std::move(vars), "", {}});
}
FoPtr fo_eq(std::string a, std::string b) {
    return mk({FoKind::Eq, "", {std::move(a), std::move(b)}, "", {}});
}
FoPtr fo_not(FoPtr a) { return mk({FoKind::Not, "", {}, "", {std::move(a)}}); }
FoPtr fo_and(FoPtr a, FoPtr b) { return mk({FoKind::And, "", {}, "", {std::move(a), std::move(b)}}); }
FoPtr fo_or(FoPtr a, FoPtr b) { return mk({FoKind::Or, "", {}, "", {std::move(a), std::move(b)}}); }
FoPtr fo_implies(FoPtr a, FoPtr b) {
    return mk({FoKind::Implies, "", {}, "", {std::move(a), std::move(b)}});
}
FoPtr fo_exists(std::string v, FoPtr a) {
    return mk({FoKind::Exists, "", {}, std::move(v), {std::move(a)}});
}
FoPtr fo_forall(std::string v, FoPtr a) {
    return mk({FoKind::Forall, "", {}, std::move(v), {std::move(a)}});
}

std::string fo_str(const FoFormula& f) {
    switch (f.kind) {
    case FoKind::Atom: {
        std::string s = f.sym + "(";
        for (size_t i = 0; i < f.vars.size(); ++i) {
            if (i) s += ",";
            s += f.vars[i];
        }
        return s + ")";
    }
    case FoKind::Eq: return f.vars[0] + " = " + f.vars[1];
    case FoKind::Not: return "~" + fo_str(*f.args[0]);
    case FoKind::And: return "(" + fo_str(*f.args[0]) + " & " + fo_str(*f.args[1]) + ")";
    case FoKind::Or: return "(" + fo_str(*f.args[0]) + " | " + fo_str(*f.args[1]) + ")";
    case FoKind::Implies: return "(" + fo_str(*f.args[0]) + " -> " + fo_str(*f.args[1]) + ")";
    case FoKind::Exists: return "exists " + f.qvar + " " + fo_str(*f.args[0]);
    case FoKind::Forall: return "forall " + f.qvar + " " + fo_str(*f.args[0]);
    }
    return "?";
}

FormulaPtr embed_fo(const FoPtr& fo) {
    const auto& reg = Registry::builtin();
    switch (fo->kind) {
    case FoKind::Atom:
        return f_atom(fo->sym, fo->vars);
    case FoKind::Eq:
        return f_eq(fo->vars[0], fo->vars[1]);
    case FoKind::Not:
        return f_conn(reg.connective("not"), {embed_fo(fo->args[0])});
    case FoKind::And:
        return f_conn(reg.connective("and"), {embed_fo(fo->args[0]), embed_fo(fo->args[1])});
    case FoKind::Or:
        return f_conn(reg.connective("or"), {embed_fo(fo->args[0]), embed_fo(fo->args[1])});
    case FoKind::Implies:
        return f_conn(reg.connective("implies"), {embed_fo(fo->args[0]), embed_fo(fo->args[1])});
    case FoKind::Exists:
        return f_agg(reg.aggregation("max"), {embed_fo(fo->args[0])}, {fo->qvar}, {f_true()});
    case FoKind::Forall:
        return f_agg(reg.aggregation("min"), {embed_fo(fo->args[0])}, {fo->qvar}, {f_true()});
    }
    fail(Errc::BadInput, "unreachable");
}

} // namespace pla
