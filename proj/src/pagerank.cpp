#include "pla/pagerank.hpp"
#include "pla/errors.hpp"
#include "pla/evaluate.hpp"
#include "pla/registry.hpp"
#include "pla/structure.hpp"

#include <fstream>
#include <sstream>

namespace pla {

namespace {

// substitute the free variable `from` by `to`; bound names are kept distinct
// by construction, so no capture can occur
FormulaPtr subst_free(const FormulaPtr& g, const std::string& from, const std::string& to) {
    auto r = [&](const std::string& v) { return v == from ? to : v; };
    switch (g->kind) {
    case FKind::Const:
        return g;
    case FKind::Eq:
        return f_eq(r(g->vars[0]), r(g->vars[1]));
    case FKind::Atom: {
        std::vector<std::string> vs;
        for (const auto& v : g->vars) vs.push_back(r(v));
        return f_atom(g->sym, std::move(vs));
    }
    case FKind::Conn: {
        std::vector<FormulaPtr> args;
        for (const auto& a : g->args) args.push_back(subst_free(a, from, to));
        return f_conn(g->conn, std::move(args));
    }
    case FKind::Agg: {
        std::vector<FormulaPtr> args, conds;
        for (const auto& a : g->args) args.push_back(subst_free(a, from, to));
        for (const auto& c : g->conds) conds.push_back(subst_free(c, from, to));
        return f_agg(g->agg, std::move(args), g->vars, std::move(conds));
    }
    default:
        fail(Errc::BadInput, "unexpected node in pagerank formula");
    }
}

} // namespace

FormulaPtr pagerank_formula(int k) {
    const auto& reg = Registry::builtin();
    auto len1 = reg.aggregation("lengthpow");
    // PR_0(x) = length^-1(x = x : w0 : T) = 1/N
    FormulaPtr pr = f_agg(len1, {f_eq("x", "x")}, {"w0"}, {f_true()});
    for (int stage = 0; stage < k; ++stage) {
        std::string y = "y" + std::to_string(stage);
        std::string z = "z" + std::to_string(stage);
        FormulaPtr prev_on_y = subst_free(pr, "x", y);
        // 1/|OUT_y|
        FormulaPtr out_inv = f_agg(len1, {f_eq(y, y)}, {z}, {f_atom("L", {y, z})});
        FormulaPtr body =
            f_conn(reg.connective("and"),
                   {f_eq("x", "x"),
                    f_conn(reg.connective("product"), {std::move(prev_on_y), std::move(out_inv)})});
        pr = f_agg(reg.aggregation("tsum"), {std::move(body)}, {y}, {f_atom("L", {y, "x"})});
    }
    return pr;
}

std::vector<Value> pagerank_demo(const std::vector<std::pair<int, int>>& edges, int k) {
    if (edges.empty()) fail(Errc::BadInput, "pagerank needs a nonempty graph");
    int n = 0;
    for (auto [u, v] : edges) n = std::max({n, u + 1, v + 1});
    std::vector<bool> has_out(n, false);
    for (auto [u, v] : edges) {
        if (u < 0 || v < 0) fail(Errc::BadInput, "negative node id");
        has_out[u] = true;
    }
    for (int v = 0; v < n; ++v)
        if (!has_out[v]) fail(Errc::DanglingNode, "node " + std::to_string(v) + " has no out-link");

    // the graph as a structure: link relation L over a throwaway star tree
    std::vector<std::optional<int>> parents(n);
    for (int v = 1; v < n; ++v) parents[v] = 0;
    auto tree = std::make_shared<Tree>(Tree::from_parents(parents));
    Signature sig;
    sig.add("L", 2);
    SigmaStructure A(tree, sig);
    for (auto [u, v] : edges) A.set(0, std::vector<int>{u, v}, true);

    FormulaPtr pr = pagerank_formula(k);
    std::vector<Value> out;
    for (int x = 0; x < n; ++x) out.push_back(evaluate(A, *pr, {{"x", x}}));
    return out;
}

std::vector<std::pair<int, int>> load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::BadInput, "cannot open graph file " + path);
    std::vector<std::pair<int, int>> edges;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        int u, v;
        if (!(ls >> u >> v)) fail(Errc::BadInput, "bad edge line: " + line);
        edges.emplace_back(u, v);
    }
    return edges;
}

} // namespace pla
