#include "pla/parser.hpp"
#include "pla/errors.hpp"

#include <cctype>
#include <map>
#include <set>

namespace pla {

namespace {

enum class Tok { Ident, Number, LParen, RParen, LBrace, RBrace, Comma, Colon, Semi, Eq, Bang, Arrow, Pipe, End };

struct Token {
    Tok kind;
    std::string text;
    size_t pos;
};

struct Lexer {
    std::string src;
    size_t i = 0;
    std::vector<Token> toks;

    void run() {
        while (i < src.size()) {
            char c = src[i];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++i;
                continue;
            }
            size_t start = i;
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                while (i < src.size() &&
                       (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_'))
                    ++i;
                toks.push_back({Tok::Ident, src.substr(start, i - start), start});
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c))) {
                while (i < src.size() && (std::isdigit(static_cast<unsigned char>(src[i])) ||
                                          src[i] == '.' || src[i] == '/'))
                    ++i;
                toks.push_back({Tok::Number, src.substr(start, i - start), start});
                continue;
            }
            switch (c) {
            case '(': toks.push_back({Tok::LParen, "(", start}); break;
            case ')': toks.push_back({Tok::RParen, ")", start}); break;
            case '{': toks.push_back({Tok::LBrace, "{", start}); break;
            case '}': toks.push_back({Tok::RBrace, "}", start}); break;
            case ',': toks.push_back({Tok::Comma, ",", start}); break;
            case ':': toks.push_back({Tok::Colon, ":", start}); break;
            case ';': toks.push_back({Tok::Semi, ";", start}); break;
            case '=': toks.push_back({Tok::Eq, "=", start}); break;
            case '!': toks.push_back({Tok::Bang, "!", start}); break;
            case '|': toks.push_back({Tok::Pipe, "|", start}); break;
            case '-':
                if (i + 1 < src.size() && src[i + 1] == '>') {
                    toks.push_back({Tok::Arrow, "->", start});
                    ++i;
                    break;
                }
                [[fallthrough]];
            default:
                fail(Errc::SyntaxError, "unexpected character '" + std::string(1, c) + "' at " +
                                            std::to_string(start));
            }
            ++i;
        }
        toks.push_back({Tok::End, "", src.size()});
    }
};

struct Parser {
    std::vector<Token> toks;
    size_t at = 0;
    const Signature* sig;
    const Registry& reg;
    std::set<std::string> bound; // enclosing binder context

    const Token& peek(int ahead = 0) const {
        size_t j = at + ahead;
        return j < toks.size() ? toks[j] : toks.back();
    }
    Token take() { return toks[at < toks.size() - 1 ? at++ : at]; }

    [[noreturn]] void err(const std::string& expected) {
        fail(Errc::SyntaxError, "expected " + expected + " at position " +
                                    std::to_string(peek().pos) + " (got '" + peek().text + "')");
    }
    void expect(Tok k, const std::string& what) {
        if (peek().kind != k) err(what);
        take();
    }

    std::string ident(const std::string& what) {
        if (peek().kind != Tok::Ident) err(what);
        return take().text;
    }

    Rational number() {
        if (peek().kind != Tok::Number) err("a number");
        return rational_from_string(take().text);
    }

    void check_atom(const std::string& rel, size_t arity, size_t pos) {
        if (rel == Signature::tree_symbol) {
            if (arity != 2) fail(Errc::ArityMismatch, "E is binary (position " + std::to_string(pos) + ")");
            return;
        }
        if (!sig) return;
        int r = sig->find(rel);
        if (r < 0) fail(Errc::UnknownSymbol, rel + " (position " + std::to_string(pos) + ")");
        if (sig->arity(r) != static_cast<int>(arity))
            fail(Errc::ArityMismatch, rel + " has arity " + std::to_string(sig->arity(r)));
    }

    std::vector<std::string> var_list_parens() {
        expect(Tok::LParen, "'('");
        std::vector<std::string> vars;
        vars.push_back(ident("a variable"));
        while (peek().kind == Tok::Comma) {
            take();
            vars.push_back(ident("a variable"));
        }
        expect(Tok::RParen, "')'");
        return vars;
    }

    FormulaPtr formula() {
        const Token& t = peek();
        if (t.kind == Tok::Number) return f_const(number());
        if (t.kind != Tok::Ident) err("a formula");
        const std::string name = t.text;
        if (name == "T" || name == "true") {
            take();
            return f_true();
        }
        if (name == "F" || name == "false") {
            take();
            return f_false();
        }
        if (peek(1).kind == Tok::Eq) {
            take();
            take();
            std::string rhs = ident("a variable after '='");
            return f_eq(name, rhs);
        }
        if (name == "exists" || name == "forall") return quantifier(name);
        if (name == "closed") return closure_macro();
        if (name == "cbf") return cbf_macro();
        if (name == "root" || name == "childofroot" || name == "atlevel") return type_sugar();
        if (name == "child") {
            take();
            auto vars = var_list_parens();
            if (vars.size() != 2) fail(Errc::ArityMismatch, "child takes two variables");
            return f_atom(Signature::tree_symbol, std::move(vars));
        }
        if (auto c = reg.connective(name)) {
            take();
            expect(Tok::LParen, "'('");
            std::vector<FormulaPtr> args;
            args.push_back(formula());
            while (peek().kind == Tok::Comma) {
                take();
                args.push_back(formula());
            }
            expect(Tok::RParen, "')'");
            return f_conn(c, std::move(args));
        }
        if (name == "lengthpow" && peek(1).kind == Tok::LParen && peek(2).kind == Tok::Number &&
            peek(3).kind == Tok::RParen && peek(4).kind == Tok::LParen) {
            take();
            take();
            Rational beta = number();
            take(); // ')'
            return aggregation(make_lengthpow(beta));
        }
        if (auto a = reg.aggregation(name)) {
            take();
            return aggregation(a);
        }
        // a relation atom
        take();
        if (peek().kind != Tok::LParen) err("'(' after relation " + name);
        auto vars = var_list_parens();
        check_atom(name, vars.size(), t.pos);
        return f_atom(name, std::move(vars));
    }

    FormulaPtr aggregation(AggregationPtr fn) {
        expect(Tok::LParen, "'('");
        std::vector<FormulaPtr> binders_pending; // inner formulas parsed before ':'
        binders_pending.push_back(formula());
        while (peek().kind == Tok::Comma) {
            take();
            binders_pending.push_back(formula());
        }
        expect(Tok::Colon, "':'");
        std::vector<std::string> ys;
        while (peek().kind == Tok::Ident) ys.push_back(take().text);
        if (ys.empty()) err("bound variables");
        for (const auto& y : ys) {
            if (bound.count(y))
                fail(Errc::RebindingBoundVar, y + " is already bound in an enclosing aggregation");
        }
        expect(Tok::Colon, "':'");
        for (const auto& y : ys) bound.insert(y);
        // conditioning formulas may use the bound variables too
        std::vector<FormulaPtr> conds;
        conds.push_back(formula());
        while (peek().kind == Tok::Comma) {
            take();
            conds.push_back(formula());
        }
        for (const auto& y : ys) bound.erase(y);
        expect(Tok::RParen, "')'");
        return f_agg(std::move(fn), std::move(binders_pending), std::move(ys), std::move(conds));
    }

    FormulaPtr quantifier(const std::string& kind) {
        take();
        std::vector<std::string> ys;
        while (peek().kind == Tok::Ident) ys.push_back(take().text);
        if (ys.empty()) err("quantified variables");
        for (const auto& y : ys)
            if (bound.count(y)) fail(Errc::RebindingBoundVar, y + " is already bound");
        expect(Tok::LParen, "'('");
        for (const auto& y : ys) bound.insert(y);
        FormulaPtr body = formula();
        for (const auto& y : ys) bound.erase(y);
        expect(Tok::RParen, "')'");
        auto fn = reg.aggregation(kind == "exists" ? "max" : "min");
        return f_agg(fn, {std::move(body)}, std::move(ys), {f_true()});
    }

    // bound variables are parsed inside aggregation(): note the inner
    // formulas are parsed before the binder list is known, so rebinding is
    // detected against the enclosing context only, which the syntax
    // definition is about; self-shadowing inside one aggregation cannot be
    // expressed by the grammar anyway.

    struct MacroLit {
        bool pos;
        std::string rel;
        std::vector<std::string> vars;
    };

    FormulaPtr closure_macro() {
        take();
        expect(Tok::LBrace, "'{'");
        std::vector<std::string> order; // first appearance
        std::set<std::string> seen_vars;
        auto note = [&](const std::string& v) {
            if (seen_vars.insert(v).second) order.push_back(v);
        };
        std::vector<MacroLit> lits;
        while (peek().kind != Tok::RBrace) {
            bool pos = true;
            if (peek().kind == Tok::Bang) {
                take();
                pos = false;
            }
            std::string head = ident("a variable or literal");
            if (peek().kind == Tok::LParen) {
                auto vars = var_list_parens();
                for (const auto& v : vars) note(v);
                check_atom(head, vars.size(), peek().pos);
                lits.push_back({pos, head, std::move(vars)});
            } else {
                if (!pos) err("a literal after '!'");
                note(head);
            }
            if (peek().kind == Tok::Semi)
                take();
            else
                break;
        }
        expect(Tok::RBrace, "'}'");
        return build_type(order, lits);
    }

    FormulaPtr build_type(const std::vector<std::string>& order, const std::vector<MacroLit>& lits) {
        std::vector<std::string> outer, exist;
        for (const auto& v : order)
            (v[0] == '_' ? exist : outer).push_back(v);
        std::map<std::string, int> idx;
        for (size_t i = 0; i < outer.size(); ++i) idx[outer[i]] = static_cast<int>(i);
        for (size_t i = 0; i < exist.size(); ++i) idx[exist[i]] = static_cast<int>(outer.size() + i);
        int n = static_cast<int>(order.size());

        std::vector<int> parent(n, -1);
        std::vector<char> has_parent(n, 0);
        std::vector<std::pair<int, int>> neg_e;
        Signature tsig = sig ? *sig : Signature{};
        if (!sig) {
            std::map<std::string, int> arity;
            for (const auto& l : lits)
                if (l.rel != Signature::tree_symbol) arity.emplace(l.rel, static_cast<int>(l.vars.size()));
            for (auto& [nm, ar] : arity) tsig.add(nm, ar);
        }
        std::vector<std::map<std::vector<int>, bool>> tlits(tsig.size());
        for (const auto& l : lits) {
            std::vector<int> tuple;
            for (const auto& v : l.vars) tuple.push_back(idx.at(v));
            if (l.rel == Signature::tree_symbol) {
                if (l.pos) {
                    if (has_parent[tuple[1]] && parent[tuple[1]] != tuple[0])
                        fail(Errc::SyntaxError, "two parents for " + l.vars[1]);
                    has_parent[tuple[1]] = 1;
                    parent[tuple[1]] = tuple[0];
                } else {
                    neg_e.emplace_back(tuple[0], tuple[1]);
                }
                continue;
            }
            int r = tsig.find(l.rel);
            if (r < 0) fail(Errc::UnknownSymbol, l.rel);
            auto [it, fresh] = tlits[r].emplace(tuple, l.pos);
            if (!fresh && it->second != l.pos)
                fail(Errc::SyntaxError, "contradictory literals on " + l.rel);
        }
        for (auto [u, v] : neg_e)
            if (has_parent[v] && parent[v] == u)
                fail(Errc::SyntaxError, "contradictory E literals in closure macro");
        for (int v = 0; v < n; ++v)
            if (!has_parent[v]) parent[v] = -1;
        ClosureType t;
        try {
            t = ClosureType::make(static_cast<int>(outer.size()), parent, tsig, std::move(tlits));
        } catch (const Error& e) {
            fail(Errc::SyntaxError, std::string("closure macro: ") + e.what());
        }
        return f_type(std::move(t), outer);
    }

    FormulaPtr type_sugar() {
        std::string kind = take().text;
        expect(Tok::LParen, "'('");
        std::string v = ident("a variable");
        int level = kind == "childofroot" ? 1 : 0;
        if (kind == "atlevel") {
            expect(Tok::Comma, "','");
            Rational l = number();
            if (denominator(l) != 1 || l < 0) fail(Errc::BadParameters, "atlevel needs a level >= 0");
            level = numerator(l).convert_to<int>();
        }
        expect(Tok::RParen, "')'");
        // variable chain: v at `level`, existential ancestors up to the root
        int n = level + 1;
        std::vector<int> parent(n, -1);
        if (n > 1) {
            parent[0] = 1;
            for (int i = 1; i + 1 < n; ++i) parent[i] = i + 1;
        }
        Signature tsig = sig ? *sig : Signature{};
        ClosureType t = ClosureType::make(1, parent, tsig, {});
        return f_type(std::move(t), {v});
    }

    FormulaPtr cbf_macro() {
        take();
        expect(Tok::LParen, "'('");
        ClosureBasicFormula cbf;
        bool first = true;
        while (true) {
            FormulaPtr tf = formula();
            if (tf->kind != FKind::Type)
                fail(Errc::SyntaxError, "cbf cases must be closure types");
            expect(Tok::Arrow, "'->'");
            Rational c = number();
            if (c < 0 || c > 1) fail(Errc::BadParameters, "cbf constants live in [0,1]");
            if (first) {
                cbf.outer_vars = tf->type->outer;
                first = false;
            } else if (cbf.outer_vars != tf->type->outer) {
                fail(Errc::SyntaxError, "cbf cases must share outer variables");
            }
            cbf.cases.emplace_back(tf->type->type, Value::exact(c));
            if (peek().kind == Tok::Pipe) {
                take();
                continue;
            }
            break;
        }
        expect(Tok::RParen, "')'");
        return f_cbf(std::move(cbf));
    }
};

} // namespace

FormulaPtr parse_formula(const std::string& text, const ParseOptions& opts) {
    Lexer lex{text};
    lex.run();
    Parser p{std::move(lex.toks), 0, opts.sig, opts.registry ? *opts.registry : Registry::builtin(), {}};
    FormulaPtr f = p.formula();
    if (p.peek().kind != Tok::End) p.err("end of input");
    return f;
}

} // namespace pla
