#include "pla/evaluate.hpp"
#include "pla/errors.hpp"
#include "pla/registry.hpp"

#include <algorithm>

namespace pla {

namespace {

struct Env {
    std::vector<std::pair<std::string, int>> slots;

    int lookup(const std::string& name) const {
        for (auto it = slots.rbegin(); it != slots.rend(); ++it)
            if (it->first == name) return it->second;
        fail(Errc::UnboundVariable, name);
    }
    void push(const std::string& name, int node) { slots.emplace_back(name, node); }
    void pop(size_t n) { slots.resize(slots.size() - n); }
};

struct Evaluator {
    const SigmaStructure& A;
    Env env;

    int rel_index(const std::string& name) const {
        int r = A.sig().find(name);
        if (r < 0) fail(Errc::SignatureMismatch, name + " is not in the structure's signature");
        return r;
    }

    Value eval(const Formula& f) {
        switch (f.kind) {
        case FKind::Const:
            return Value::exact(f.value);
        case FKind::Eq:
            return env.lookup(f.vars[0]) == env.lookup(f.vars[1]) ? Value::one() : Value::zero();
        case FKind::Atom: {
            std::vector<int> nodes(f.vars.size());
            for (size_t i = 0; i < f.vars.size(); ++i) nodes[i] = env.lookup(f.vars[i]);
            if (f.sym == Signature::tree_symbol) {
                if (nodes.size() != 2) fail(Errc::ArityMismatch, "E is binary");
                return A.tree().parent(nodes[1]) == nodes[0] ? Value::one() : Value::zero();
            }
            return A.holds(rel_index(f.sym), nodes) ? Value::one() : Value::zero();
        }
        case FKind::Conn: {
            std::vector<Value> vals(f.args.size());
            for (size_t i = 0; i < f.args.size(); ++i) vals[i] = eval(*f.args[i]);
            return f.conn->fn(vals);
        }
        case FKind::Type: {
            std::vector<int> nodes(f.type->outer.size());
            for (size_t i = 0; i < nodes.size(); ++i) nodes[i] = env.lookup(f.type->outer[i]);
            return satisfies(f.type->type, A, nodes) ? Value::one() : Value::zero();
        }
        case FKind::Cbf: {
            std::vector<int> nodes(f.cbf->cbf.outer_vars.size());
            for (size_t i = 0; i < nodes.size(); ++i) nodes[i] = env.lookup(f.cbf->cbf.outer_vars[i]);
            return f.cbf->cbf.eval(A, nodes);
        }
        case FKind::Agg:
            return eval_agg(f);
        }
        fail(Errc::BadInput, "unreachable");
    }

    // witness tuples for one conditioning formula; fast paths for closure
    // types covering all bound variables and for single E-atoms
    std::vector<std::vector<int>> witnesses(const Formula& chi, const std::vector<std::string>& ys) {
        std::vector<std::vector<int>> out;
        if (chi.kind == FKind::Type) {
            const auto& tc = *chi.type;
            bool covers = true;
            for (const auto& y : ys)
                if (std::find(tc.outer.begin(), tc.outer.end(), y) == tc.outer.end()) covers = false;
            if (covers) {
                std::vector<int> assignment(tc.outer.size(), -1);
                std::vector<int> ypos(tc.outer.size(), -1); // outer position -> ys index
                for (size_t i = 0; i < tc.outer.size(); ++i) {
                    auto it = std::find(ys.begin(), ys.end(), tc.outer[i]);
                    if (it == ys.end())
                        assignment[i] = env.lookup(tc.outer[i]);
                    else
                        ypos[i] = static_cast<int>(it - ys.begin());
                }
                enumerate_witnesses(tc.type, A, assignment, [&](const std::vector<int>& full) {
                    std::vector<int> tuple(ys.size(), -1);
                    for (size_t i = 0; i < ypos.size(); ++i)
                        if (ypos[i] >= 0) tuple[ypos[i]] = full[i];
                    out.push_back(std::move(tuple));
                });
                return out;
            }
        }
        if (chi.kind == FKind::Atom && chi.sym == Signature::tree_symbol && ys.size() == 1) {
            const std::string& y = ys[0];
            const auto& u = chi.vars[0];
            const auto& w = chi.vars[1];
            if (w == y && u != y) {
                int base = env.lookup(u);
                for (int c : A.tree().children(base)) out.push_back({c});
                return out;
            }
            if (u == y && w != y) {
                int base = env.lookup(w);
                int p = A.tree().parent(base);
                if (p >= 0) out.push_back({p});
                return out;
            }
        }
        // brute force over all tuples in ascending node-id order
        const long long n = A.tree().size();
        std::vector<int> tuple(ys.size(), 0);
        while (true) {
            for (size_t i = 0; i < ys.size(); ++i) env.push(ys[i], tuple[i]);
            bool hit = eval(chi).is_one();
            env.pop(ys.size());
            if (hit) out.push_back(tuple);
            int pos = static_cast<int>(ys.size()) - 1;
            while (pos >= 0 && tuple[pos] == n - 1) tuple[pos--] = 0;
            if (pos < 0) break;
            tuple[pos]++;
        }
        return out;
    }

    Value eval_agg(const Formula& f) {
        std::vector<std::vector<Value>> seqs(f.args.size());
        for (size_t i = 0; i < f.args.size(); ++i) {
            auto tuples = witnesses(*f.conds[i], f.vars);
            if (tuples.empty()) return Value::zero();
            seqs[i].reserve(tuples.size());
            for (const auto& t : tuples) {
                for (size_t j = 0; j < f.vars.size(); ++j) env.push(f.vars[j], t[j]);
                seqs[i].push_back(eval(*f.args[i]));
                env.pop(f.vars.size());
            }
        }
        return f.agg->fn(seqs);
    }
};

} // namespace

Value evaluate(const SigmaStructure& A, const Formula& phi, const Valuation& v) {
    for (const auto& name : phi.needed_vars)
        if (!v.count(name)) fail(Errc::UnboundVariable, name);
    Evaluator ev{A, {}};
    for (const auto& [name, node] : v) {
        if (node < 0 || node >= A.tree().size()) fail(Errc::InvalidId, name + " -> " + std::to_string(node));
        ev.env.push(name, node);
    }
    return ev.eval(phi);
}

} // namespace pla
