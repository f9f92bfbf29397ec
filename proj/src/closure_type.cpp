#include "pla/closure_type.hpp"
#include "pla/errors.hpp"

#include <algorithm>
#include <climits>
#include <numeric>
#include <sstream>

namespace pla {

int ClosureType::root_var() const {
    int r = -1;
    for (int v = 0; v < num_vars(); ++v)
        if (parent[v] < 0) {
            if (r >= 0) fail(Errc::BadInput, "closure type with two root variables");
            r = v;
        }
    if (r < 0) fail(Errc::BadInput, "closure type without a root variable");
    return r;
}

int ClosureType::var_level(int v) const {
    int l = 0;
    while (parent[v] >= 0) {
        v = parent[v];
        ++l;
        if (l > num_vars()) fail(Errc::Cycle, "variable parents cycle");
    }
    return l;
}

int ClosureType::height() const {
    int h = 0;
    for (int v = 0; v < num_vars(); ++v) h = std::max(h, var_level(v));
    return h;
}

bool ClosureType::complete() const {
    for (int r = 0; r < sig.size(); ++r) {
        size_t expect = 1;
        for (int i = 0; i < sig.arity(r); ++i) expect *= num_vars();
        if (lits[r].size() != expect) return false;
    }
    return true;
}

std::vector<int> ClosureType::var_closure(const std::vector<int>& vars) const {
    std::vector<bool> in(num_vars(), false);
    in[root_var()] = true;
    for (int v : vars) {
        int u = v;
        while (u >= 0 && !in[u]) {
            in[u] = true;
            u = parent[u];
        }
    }
    std::vector<int> out;
    for (int v = 0; v < num_vars(); ++v)
        if (in[v]) out.push_back(v);
    return out;
}

namespace {

// least outer index in the subtree of each variable; outer-marked coverage
// is what makes the canonical sibling order total
std::vector<int> min_outer_desc(const std::vector<int>& parent, int num_outer) {
    int n = static_cast<int>(parent.size());
    std::vector<int> m(n, INT_MAX);
    // repeated relaxation; n is tiny
    for (int pass = 0; pass < n; ++pass)
        for (int v = 0; v < n; ++v) {
            int best = v < num_outer ? v : INT_MAX;
            for (int c = 0; c < n; ++c)
                if (parent[c] == v) best = std::min(best, m[c]);
            m[v] = best;
        }
    return m;
}

} // namespace

ClosureType ClosureType::make(int num_outer, std::vector<int> parent, Signature sig,
                              std::vector<std::map<std::vector<int>, bool>> lits) {
    const int n = static_cast<int>(parent.size());
    if (n == 0) fail(Errc::BadInput, "closure type needs at least the root variable");
    if (num_outer < 0 || num_outer > n) fail(Errc::BadInput, "bad outer count");
    if (num_outer == 0 && n != 1)
        fail(Errc::BadInput, "the closure of an empty tuple is the root alone");
    if (static_cast<int>(lits.size()) != sig.size()) lits.resize(sig.size());

    ClosureType t;
    t.num_outer = num_outer;
    t.parent = std::move(parent);
    t.sig = std::move(sig);
    t.lits = std::move(lits);

    int root = t.root_var();
    for (int v = 0; v < n; ++v) t.var_level(v); // validates acyclicity
    auto mo = min_outer_desc(t.parent, num_outer);
    for (int v = num_outer; v < n; ++v)
        if (v != root && mo[v] == INT_MAX)
            fail(Errc::BadInput, "existential variable without an outer descendant");

    for (int r = 0; r < t.sig.size(); ++r)
        for (const auto& [tuple, pol] : t.lits[r]) {
            (void)pol;
            if (static_cast<int>(tuple.size()) != t.sig.arity(r))
                fail(Errc::ArityMismatch, "literal arity for " + t.sig.name(r));
            for (int v : tuple)
                if (v < 0 || v >= n) fail(Errc::BadInput, "literal variable out of range");
        }

    // canonical renumbering of existential variables: BFS from the root,
    // siblings by least outer descendant
    std::vector<int> order;
    std::vector<int> queue{root};
    size_t head = 0;
    while (head < queue.size()) {
        int v = queue[head++];
        order.push_back(v);
        std::vector<int> kids;
        for (int c = 0; c < n; ++c)
            if (t.parent[c] == v) kids.push_back(c);
        std::sort(kids.begin(), kids.end(), [&](int a, int b) { return mo[a] < mo[b]; });
        for (int c : kids) queue.push_back(c);
    }
    if (static_cast<int>(order.size()) != n) fail(Errc::BadInput, "variable parents do not form a tree");

    std::vector<int> remap(n, -1);
    for (int i = 0; i < num_outer; ++i) remap[i] = i;
    int next = num_outer;
    for (int v : order)
        if (v >= num_outer) remap[v] = next++;

    ClosureType out;
    out.num_outer = num_outer;
    out.sig = t.sig;
    out.parent.assign(n, -1);
    for (int v = 0; v < n; ++v)
        out.parent[remap[v]] = t.parent[v] < 0 ? -1 : remap[t.parent[v]];
    out.lits.resize(out.sig.size());
    for (int r = 0; r < out.sig.size(); ++r)
        for (const auto& [tuple, pol] : t.lits[r]) {
            std::vector<int> mapped(tuple.size());
            for (size_t i = 0; i < tuple.size(); ++i) mapped[i] = remap[tuple[i]];
            auto [it, fresh] = out.lits[r].emplace(std::move(mapped), pol);
            if (!fresh && it->second != pol) fail(Errc::BadInput, "conflicting literals in closure type");
        }
    return out;
}

std::string ClosureType::key() const {
    std::ostringstream os;
    os << "k" << num_outer << "|";
    for (int v : parent) os << v << ",";
    os << "|" << sig.key() << "|";
    for (int r = 0; r < sig.size(); ++r) {
        os << r << ":";
        for (const auto& [tuple, pol] : lits[r]) {
            for (int v : tuple) os << v << ".";
            os << (pol ? "+" : "-") << ";";
        }
    }
    return os.str();
}

std::string ClosureType::display(const std::vector<std::string>& outer_names) const {
    auto name = [&](int v) -> std::string {
        if (v < num_outer) {
            if (v < static_cast<int>(outer_names.size())) return outer_names[v];
            return "x" + std::to_string(v + 1);
        }
        return "_" + std::to_string(v - num_outer + 1);
    };
    std::vector<std::string> items;
    for (int v = 0; v < num_outer; ++v) items.push_back(name(v));
    if (num_outer == 0) items.push_back(name(root_var()));
    for (int v = 0; v < num_vars(); ++v)
        if (parent[v] >= 0) items.push_back("E(" + name(parent[v]) + "," + name(v) + ")");
    for (int r = 0; r < sig.size(); ++r)
        for (const auto& [tuple, pol] : lits[r]) {
            std::string s = pol ? "" : "!";
            s += sig.name(r) + "(";
            for (size_t i = 0; i < tuple.size(); ++i) {
                if (i) s += ",";
                s += name(tuple[i]);
            }
            s += ")";
            items.push_back(s);
        }
    std::string out = "closed{";
    for (size_t i = 0; i < items.size(); ++i) {
        if (i) out += "; ";
        out += items[i];
    }
    out += "}";
    return out;
}

ClosureType restrict_sig(const ClosureType& p, const Signature& sub) {
    if (!p.sig.contains(sub)) fail(Errc::SignatureMismatch, "restriction to a non-subsignature");
    std::vector<std::map<std::vector<int>, bool>> lits(sub.size());
    for (int r = 0; r < sub.size(); ++r) lits[r] = p.lits[p.sig.find(sub.name(r))];
    return ClosureType::make(p.num_outer, p.parent, sub, std::move(lits));
}

ClosureType restrict_vars(const ClosureType& p, const std::vector<int>& outer_sel) {
    for (int v : outer_sel)
        if (v < 0 || v >= p.num_outer) fail(Errc::BadInput, "restriction position out of range");
    std::vector<int> keep = p.var_closure(outer_sel);
    std::vector<int> remap(p.num_vars(), -1);
    int k = static_cast<int>(outer_sel.size());
    for (int i = 0; i < k; ++i) remap[outer_sel[i]] = i;
    int next = k;
    for (int v : keep)
        if (remap[v] < 0) remap[v] = next++;

    std::vector<int> parent(next, -1);
    for (int v : keep)
        if (p.parent[v] >= 0 && remap[p.parent[v]] >= 0) parent[remap[v]] = remap[p.parent[v]];
    std::vector<std::map<std::vector<int>, bool>> lits(p.sig.size());
    for (int r = 0; r < p.sig.size(); ++r)
        for (const auto& [tuple, pol] : p.lits[r]) {
            bool ok = true;
            std::vector<int> mapped(tuple.size());
            for (size_t i = 0; i < tuple.size(); ++i) {
                if (remap[tuple[i]] < 0) {
                    ok = false;
                    break;
                }
                mapped[i] = remap[tuple[i]];
            }
            if (ok) lits[r].emplace(std::move(mapped), pol);
        }
    return ClosureType::make(k, std::move(parent), p.sig, std::move(lits));
}

std::pair<ClosureType, int> self_contained_transform(const ClosureType& p) {
    ClosureType q = p;
    int added = q.num_exist();
    q.num_outer = q.num_vars();
    return {ClosureType::make(q.num_outer, q.parent, q.sig, q.lits), added};
}

int rank_over_suffix(const ClosureType& p, int suffix_len) {
    if (suffix_len < 0 || suffix_len > p.num_outer) fail(Errc::BadInput, "bad suffix length");
    std::vector<int> prefix, suffix;
    for (int i = 0; i < p.num_outer - suffix_len; ++i) prefix.push_back(i);
    for (int i = p.num_outer - suffix_len; i < p.num_outer; ++i) suffix.push_back(i);
    auto clx = p.var_closure(prefix);
    auto cly = p.var_closure(suffix);
    int rank = 0;
    for (int v : cly)
        if (!std::binary_search(clx.begin(), clx.end(), v)) ++rank;
    return rank;
}

bool is_y_independent(const ClosureType& p, int suffix_len) {
    std::vector<int> prefix;
    for (int i = 0; i < p.num_outer - suffix_len; ++i) prefix.push_back(i);
    auto clx = p.var_closure(prefix);
    for (int i = p.num_outer - suffix_len; i < p.num_outer; ++i)
        if (std::binary_search(clx.begin(), clx.end(), i)) return false;
    return true;
}

Positivity y_positivity(const ClosureType& p, int suffix_len) {
    bool over_tau = true;
    for (const auto& m : p.lits)
        if (!m.empty()) over_tau = false;
    if (over_tau) return Positivity::Positive;
    if (rank_over_suffix(p, suffix_len) == 0) return Positivity::Positive;
    return Positivity::Unknown;
}

std::vector<int> decompose_chain(const ClosureType& p, int suffix_len) {
    if (p.num_exist() != 0) fail(Errc::NotDecomposable, "type must be self-contained");
    if (!is_y_independent(p, suffix_len)) fail(Errc::NotDecomposable, "suffix must be independent");
    std::vector<int> prefix;
    for (int i = 0; i < p.num_outer - suffix_len; ++i) prefix.push_back(i);
    std::vector<int> remaining;
    for (int i = p.num_outer - suffix_len; i < p.num_outer; ++i) remaining.push_back(i);
    std::vector<int> chain;
    while (!remaining.empty()) {
        auto clx = p.var_closure(prefix);
        int pick = -1;
        for (int v : remaining)
            if (std::binary_search(clx.begin(), clx.end(), p.parent[v])) {
                pick = v;
                break;
            }
        if (pick < 0) fail(Errc::NotDecomposable, "no suffix variable hangs off the prefix closure");
        chain.push_back(pick);
        prefix.push_back(pick);
        remaining.erase(std::find(remaining.begin(), remaining.end(), pick));
    }
    return chain;
}

DecomposeStep decompose_rank_step(const ClosureType& p, int suffix_len) {
    int r = rank_over_suffix(p, suffix_len);
    if (r < 2) fail(Errc::NotDecomposable, "rank is " + std::to_string(r) + ", need >= 2");
    auto chain = decompose_chain(p, suffix_len);
    int pivot = chain[0];
    std::vector<int> sel;
    for (int i = 0; i < p.num_outer - suffix_len; ++i) sel.push_back(i);
    sel.push_back(pivot);
    DecomposeStep step;
    step.pivot = pivot;
    step.q = restrict_vars(p, sel);
    for (int i = p.num_outer - suffix_len; i < p.num_outer; ++i)
        if (i != pivot) step.remainder.push_back(i);
    return step;
}

namespace {

struct WitnessSearch {
    const ClosureType& p;
    const SigmaStructure& A;
    std::vector<int> node_of;
    std::vector<int> used;
    std::vector<int> rel_map; // p.sig index -> A.sig index

    void map_relations() {
        rel_map.resize(p.sig.size());
        for (int r = 0; r < p.sig.size(); ++r) {
            rel_map[r] = A.sig().find(p.sig.name(r));
            if (rel_map[r] < 0 && !p.lits[r].empty())
                fail(Errc::SignatureMismatch, p.sig.name(r) + " is not in the structure's signature");
        }
    }

    bool taken(int node) const { return std::find(used.begin(), used.end(), node) != used.end(); }

    bool assign(int var, int node) {
        // walk the forced ancestor chain upward, checking consistency
        const Tree& T = A.tree();
        if (T.level(node) != p.var_level(var)) return false;
        int v = var, nd = node;
        while (v >= 0) {
            if (node_of[v] >= 0) {
                if (node_of[v] != nd) return false;
                break;
            }
            if (taken(nd)) return false;
            node_of[v] = nd;
            used.push_back(nd);
            v = p.parent[v];
            nd = T.parent(nd);
        }
        return true;
    }

    bool check_literals() const {
        for (int r = 0; r < p.sig.size(); ++r)
            for (const auto& [tuple, pol] : p.lits[r]) {
                std::vector<int> mapped(tuple.size());
                for (size_t i = 0; i < tuple.size(); ++i) mapped[i] = node_of[tuple[i]];
                if (A.holds(rel_map[r], mapped) != pol) return false;
            }
        return true;
    }
};

} // namespace

bool satisfies(const ClosureType& p, const SigmaStructure& A, std::span<const int> outer_nodes) {
    if (static_cast<int>(outer_nodes.size()) != p.num_outer)
        fail(Errc::BadInput, "tuple length does not match the type");
    WitnessSearch ws{p, A, std::vector<int>(p.num_vars(), -1), {}, {}};
    ws.map_relations();
    if (!ws.assign(p.root_var(), A.tree().root())) return false;
    for (int i = 0; i < p.num_outer; ++i)
        if (!ws.assign(i, outer_nodes[i])) return false;
    return ws.check_literals();
}

void enumerate_witnesses(const ClosureType& p, const SigmaStructure& A,
                         const std::vector<int>& assignment,
                         const std::function<void(const std::vector<int>&)>& yield) {
    if (static_cast<int>(assignment.size()) != p.num_outer)
        fail(Errc::BadInput, "assignment length does not match the type");
    WitnessSearch ws{p, A, std::vector<int>(p.num_vars(), -1), {}, {}};
    ws.map_relations();
    if (!ws.assign(p.root_var(), A.tree().root())) return;
    for (int i = 0; i < p.num_outer; ++i)
        if (assignment[i] >= 0 && !ws.assign(i, assignment[i])) return;

    // remaining variables in parents-first order
    std::vector<int> free_vars;
    for (int v = 0; v < p.num_vars(); ++v)
        if (ws.node_of[v] < 0) free_vars.push_back(v);
    std::stable_sort(free_vars.begin(), free_vars.end(),
                     [&](int a, int b) { return p.var_level(a) < p.var_level(b); });

    const Tree& T = A.tree();
    std::vector<int> result(p.num_outer);
    std::function<void(size_t)> dfs = [&](size_t i) {
        if (i == free_vars.size()) {
            if (!ws.check_literals()) return;
            for (int j = 0; j < p.num_outer; ++j) result[j] = ws.node_of[j];
            yield(result);
            return;
        }
        int v = free_vars[i];
        int pnode = ws.node_of[p.parent[v]];
        for (int cand : T.children(pnode)) {
            if (ws.taken(cand)) continue;
            ws.node_of[v] = cand;
            ws.used.push_back(cand);
            dfs(i + 1);
            ws.used.pop_back();
            ws.node_of[v] = -1;
        }
    };
    dfs(0);
}

std::pair<SigmaStructure, std::vector<int>> witness(const ClosureType& p) {
    std::vector<std::optional<int>> parents(p.num_vars());
    for (int v = 0; v < p.num_vars(); ++v)
        if (p.parent[v] >= 0) parents[v] = p.parent[v];
    auto tree = std::make_shared<Tree>(Tree::from_parents(parents));
    SigmaStructure A(tree, p.sig);
    for (int r = 0; r < p.sig.size(); ++r)
        for (const auto& [tuple, pol] : p.lits[r])
            if (pol) A.set(r, tuple, true);
    std::vector<int> outer(p.num_outer);
    std::iota(outer.begin(), outer.end(), 0);
    return {std::move(A), std::move(outer)};
}

std::optional<ClosureType> conjoin(const ClosureType& a, const ClosureType& b) {
    if (a.num_outer != b.num_outer) fail(Errc::BadInput, "conjunction of types with different arities");
    if (!a.sig.contains(b.sig)) fail(Errc::SignatureMismatch, "conjunct signature not contained");
    if (a.parent != b.parent) return std::nullopt;
    ClosureType out = a;
    for (int rb = 0; rb < b.sig.size(); ++rb) {
        int ra = a.sig.find(b.sig.name(rb));
        for (const auto& [tuple, pol] : b.lits[rb]) {
            auto [it, fresh] = out.lits[ra].emplace(tuple, pol);
            if (!fresh && it->second != pol) return std::nullopt;
        }
    }
    return out;
}

bool extends(const ClosureType& ext, const ClosureType& base) {
    if (ext.num_outer != base.num_outer) return false;
    if (ext.parent != base.parent) return false;
    if (!ext.sig.contains(base.sig)) return false;
    for (int rb = 0; rb < base.sig.size(); ++rb) {
        int re = ext.sig.find(base.sig.name(rb));
        for (const auto& [tuple, pol] : base.lits[rb]) {
            auto it = ext.lits[re].find(tuple);
            if (it == ext.lits[re].end() || it->second != pol) return false;
        }
    }
    return true;
}

Value ClosureBasicFormula::eval(const SigmaStructure& A, std::span<const int> outer_nodes) const {
    for (const auto& [type, value] : cases)
        if (satisfies(type, A, outer_nodes)) return value;
    return Value::one();
}

const Value* ClosureBasicFormula::value_at(const ClosureType& complete_type) const {
    std::string k = complete_type.key();
    for (const auto& [type, value] : cases)
        if (type.key() == k) return &value;
    return nullptr;
}

std::string ClosureBasicFormula::display() const {
    std::string out = "cbf(";
    for (size_t i = 0; i < cases.size(); ++i) {
        if (i) out += " | ";
        out += cases[i].first.display(outer_vars) + " -> " + cases[i].second.str();
    }
    out += ")";
    return out;
}

} // namespace pla
