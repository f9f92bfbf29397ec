#include "pla/eliminate.hpp"
#include "pla/errors.hpp"
#include "pla/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

namespace pla {

std::string Provenance::str() const {
    if (kind == Kind::ExactProduct) return "exact-product";
    std::ostringstream os;
    os << "monte-carlo(n=" << ref_n << ", samples=" << samples << ", se=" << se << ")";
    return os.str();
}

namespace {

std::string net_key(const Network& net) {
    std::ostringstream os;
    write_network(os, net);
    return os.str();
}

Signature parent_signature(const Network& net, int rel) {
    Signature s;
    for (const auto& p : net.nodes[rel].parents) {
        int pi = net.find(p);
        s.add(net.nodes[pi].name, net.nodes[pi].arity);
    }
    return s;
}

// value of theta_R on a variable tuple of a self-contained complete type
Value theta_factor(const Network& net, const ClosureType& sc, int rel,
                   const std::vector<int>& tuple) {
    const auto& node = net.nodes[rel];
    if (node.theta->kind == FKind::Const) return Value::exact(node.theta->value);
    std::set<int> distinct(tuple.begin(), tuple.end());
    if (distinct.size() != tuple.size()) return Value::one(); // no complete case matches a diagonal
    ClosureType rest = restrict_sig(restrict_vars(sc, tuple), parent_signature(net, rel));
    const Value* v = node.theta->cbf->cbf.value_at(rest);
    return v ? *v : Value::one();
}

// product over all sigma\tau literal slots selected by `want`, with the
// polarity the type prescribes
Value theta_product(const Network& net, const ClosureType& s,
                    const std::function<bool(const std::vector<int>&)>& want) {
    auto [sc, added] = self_contained_transform(s);
    (void)added;
    Value prod = Value::one();
    const int n = sc.num_vars();
    for (size_t r = 0; r < net.nodes.size(); ++r) {
        int lit_index = sc.sig.find(net.nodes[r].name);
        if (lit_index < 0) continue;
        std::vector<int> tuple(net.nodes[r].arity, 0);
        while (true) {
            if (want(tuple)) {
                auto it = sc.lits[lit_index].find(tuple);
                if (it == sc.lits[lit_index].end())
                    fail(Errc::BadInput, "theta product over an incomplete type");
                Value f = theta_factor(net, sc, static_cast<int>(r), tuple);
                prod = prod * (it->second ? f : Value::one() - f);
            }
            int pos = net.nodes[r].arity - 1;
            while (pos >= 0 && tuple[pos] == n - 1) tuple[pos--] = 0;
            if (pos < 0) break;
            tuple[pos]++;
        }
    }
    return prod;
}

ClosureType tau_part(const ClosureType& p) { return restrict_sig(p, Signature{}); }

bool over_tau(const ClosureType& p) {
    for (const auto& m : p.lits)
        if (!m.empty()) return false;
    return true;
}

// nearest rational with denominator 10^9, for Monte Carlo parameters
Rational approx_rat(const Value& v) {
    if (v.is_exact()) return v.rat();
    long long den = 1000000000;
    long long num = std::llround(v.dbl() * static_cast<double>(den));
    if (num < 0) num = 0;
    if (num > den) num = den;
    return Rational(num, den);
}

std::mutex memo_mutex;
std::map<std::string, Value> memo;

bool memo_get(const std::string& key, Value& out) {
    std::lock_guard<std::mutex> lock(memo_mutex);
    auto it = memo.find(key);
    if (it == memo.end()) return false;
    out = it->second;
    return true;
}

void memo_put(const std::string& key, const Value& v) {
    std::lock_guard<std::mutex> lock(memo_mutex);
    memo.emplace(key, v);
}

int delta_for(const EliminationOptions& opts, const ClosureType& p) {
    return std::max(opts.delta, p.height());
}

// ---- Monte Carlo fallbacks ------------------------------------------------

ConvergenceConstant mc_convergence(const Network& net, const ClosureType& p,
                                   const ClosureType& base, const EliminationOptions& opts) {
    ConvergenceConstant out{p, base, Value::zero(), {}, false, false};
    auto tree = std::make_shared<Tree>(
        Tree::generate(TreeGenConfig::uniform(delta_for(opts, p), opts.mc_n)));
    // anchor tuple from the tau skeleton
    SigmaStructure bare(tree, net.sig());
    std::vector<int> anchor;
    enumerate_witnesses(tau_part(p), bare, std::vector<int>(p.num_outer, -1),
                        [&](const std::vector<int>& t) {
                            if (anchor.empty()) anchor = t;
                        });
    if (anchor.empty()) {
        out.vacuous = true;
        return out;
    }
    long long hits = 0;
    for (long long s = 0; s < opts.mc_samples; ++s) {
        SigmaStructure A =
            sample_world(tree, net, ctr_rng::hash_words({opts.seed, 0xc0, static_cast<uint64_t>(s)}));
        if (satisfies(p, A, anchor)) ++hits;
    }
    double est = static_cast<double>(hits) / static_cast<double>(opts.mc_samples);
    out.value = Value::approx(est);
    out.prov.kind = Provenance::Kind::MonteCarlo;
    out.prov.ref_n = opts.mc_n;
    out.prov.samples = opts.mc_samples;
    out.prov.se = std::sqrt(est * (1 - est) / static_cast<double>(opts.mc_samples));
    return out;
}

BalanceConstant mc_balance(const Network& net, const ClosureType& p, const ClosureType& chi,
                           const ClosureType& q, const EliminationOptions& opts) {
    BalanceConstant out{p, chi, q, Value::zero(), {}};
    auto tree = std::make_shared<Tree>(
        Tree::generate(TreeGenConfig::uniform(delta_for(opts, p), opts.mc_n)));
    ClosureType skel = tau_part(p);
    long long num = 0, den = 0;
    for (long long s = 0; s < opts.mc_samples; ++s) {
        SigmaStructure A =
            sample_world(tree, net, ctr_rng::hash_words({opts.seed, 0xba, static_cast<uint64_t>(s)}));
        // outer anchors satisfying q, capped per world
        std::vector<std::vector<int>> anchors;
        enumerate_witnesses(q, A, std::vector<int>(q.num_outer, -1), [&](const std::vector<int>& t) {
            if (anchors.size() < 8) anchors.push_back(t);
        });
        for (const auto& a : anchors) {
            std::vector<int> assignment(p.num_outer, -1);
            for (int i = 0; i < q.num_outer; ++i) assignment[i] = a[i];
            enumerate_witnesses(skel, A, assignment, [&](const std::vector<int>& full) {
                if (satisfies(chi, A, full)) {
                    ++den;
                    if (satisfies(p, A, full)) ++num;
                }
            });
        }
    }
    double est = den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    out.value = Value::approx(est);
    out.prov.kind = Provenance::Kind::MonteCarlo;
    out.prov.ref_n = opts.mc_n;
    out.prov.samples = opts.mc_samples;
    out.prov.se = den == 0 ? 1.0 : std::sqrt(est * (1 - est) / static_cast<double>(den));
    return out;
}

} // namespace

ConvergenceConstant convergence_constant(const Network& net, const ClosureType& p,
                                         const ClosureType& base, const EliminationOptions& opts) {
    ConvergenceConstant out{p, base, Value::zero(), {}, false, false};
    if (!over_tau(base)) fail(Errc::BadInput, "base type must be over tau");
    ClosureType base_tau = tau_part(base);
    if (!(tau_part(p) == base_tau)) {
        out.vacuous = true;
        out.eventually_constant = true;
        return out; // converges to 0 trivially
    }
    if (!net.closure_basic()) {
        if (!opts.mc_fallback) fail(Errc::NotClosureBasic, "exact constants need closure-basic thetas");
        return mc_convergence(net, p, base, opts);
    }
    std::string key = "conv|" + p.key() + "|" + base.key() + "|" + net_key(net);
    Value cached;
    if (memo_get(key, cached)) {
        out.value = cached;
        out.eventually_constant = true;
        return out;
    }
    auto all = [](const std::vector<int>&) { return true; };
    Value v = Value::zero();
    if (p.complete()) {
        v = theta_product(net, p, all);
    } else {
        auto catalog =
            enumerate_complete_closure_types(p.sig, p.num_outer, delta_for(opts, p), opts.catalog);
        for (const ClosureType* s : complete_extensions(p, *catalog)) v = v + theta_product(net, *s, all);
    }
    memo_put(key, v);
    out.value = v;
    out.eventually_constant = true;
    return out;
}

BalanceConstant balance_constant(const Network& net, const ClosureType& p, const ClosureType& chi,
                                 const ClosureType& q, const EliminationOptions& opts) {
    BalanceConstant out{p, chi, q, Value::zero(), {}};
    int suffix = p.num_outer - q.num_outer;
    if (suffix < 1) fail(Errc::BadInput, "balance needs a nonempty bound suffix");
    if (!q.complete()) fail(Errc::BadInput, "outer type must be complete");
    if (y_positivity(chi, suffix) != Positivity::Positive)
        fail(Errc::PositivityUnknown, "conditioning type is outside the decidable positive fragment");
    if (!net.closure_basic()) {
        if (!opts.mc_fallback) fail(Errc::NotClosureBasic, "exact constants need closure-basic thetas");
        return mc_balance(net, p, chi, q, opts);
    }
    std::string key = "bal|" + p.key() + "|" + chi.key() + "|" + q.key() + "|" + net_key(net);
    Value cached;
    if (memo_get(key, cached)) {
        out.value = cached;
        return out;
    }

    auto zero = [&]() {
        memo_put(key, Value::zero());
        return out;
    };
    // conjunction p and chi
    auto combined = conjoin(p, chi.sig == p.sig ? chi : [&] {
        // lift chi's literals into p's signature
        ClosureType lifted = chi;
        std::vector<std::map<std::vector<int>, bool>> lits(p.sig.size());
        for (int r = 0; r < chi.sig.size(); ++r) {
            int t = p.sig.find(chi.sig.name(r));
            if (t < 0) fail(Errc::SignatureMismatch, "conditioning type outside the network signature");
            lits[t] = chi.lits[r];
        }
        return ClosureType::make(chi.num_outer, chi.parent, p.sig, std::move(lits));
    }());
    if (!combined) return zero();
    // the prefix part must be exactly q
    std::vector<int> prefix(q.num_outer);
    for (int i = 0; i < q.num_outer; ++i) prefix[i] = i;
    ClosureType p_prefix = restrict_vars(*combined, prefix);
    if (p_prefix.parent != q.parent) return zero();
    // inject q's literals through the canonical variable correspondence
    ClosureType work = *combined;
    {
        // q var -> work var: outer by position; existentials via ancestor chains
        std::vector<int> qmap(q.num_vars(), -1);
        for (int i = 0; i < q.num_outer; ++i) qmap[i] = i;
        for (int v = 0; v < q.num_vars(); ++v) {
            if (qmap[v] >= 0) continue;
            // v is an ancestor of some outer variable at a fixed depth
            int o = -1, steps = 0;
            for (int u = 0; u < q.num_outer && o < 0; ++u) {
                int w = u, st = 0;
                while (w >= 0) {
                    if (w == v) {
                        o = u;
                        steps = st;
                        break;
                    }
                    w = q.parent[w];
                    ++st;
                }
            }
            if (o < 0) fail(Errc::BadInput, "existential without outer descendant");
            int w = o;
            for (int s = 0; s < steps; ++s) w = work.parent[w];
            qmap[v] = w;
        }
        for (int r = 0; r < q.sig.size(); ++r) {
            int t = work.sig.find(q.sig.name(r));
            if (t < 0) fail(Errc::SignatureMismatch, "outer type outside the network signature");
            for (const auto& [tuple, pol] : q.lits[r]) {
                std::vector<int> mapped(tuple.size());
                for (size_t i = 0; i < tuple.size(); ++i) mapped[i] = qmap[tuple[i]];
                auto [it, fresh] = work.lits[t].emplace(std::move(mapped), pol);
                if (!fresh && it->second != pol) return zero();
            }
        }
        work = ClosureType::make(work.num_outer, work.parent, work.sig, work.lits);
    }

    // new variables: outside the closure of the prefix
    auto cl_prefix = work.var_closure(prefix);
    std::vector<bool> is_new(work.num_vars(), true);
    for (int v : cl_prefix) is_new[v] = false;

    auto catalog =
        enumerate_complete_closure_types(work.sig, work.num_outer, delta_for(opts, work), opts.catalog);
    Value v = Value::zero();
    for (const ClosureType* s : complete_extensions(work, *catalog)) {
        Value contrib = theta_product(net, *s, [&](const std::vector<int>& tuple) {
            for (int x : tuple)
                if (x < static_cast<int>(is_new.size()) && is_new[x]) return true;
            return false;
        });
        v = v + contrib;
    }
    memo_put(key, v);
    out.value = v;
    return out;
}

// ---- the compiler ----------------------------------------------------------

namespace {

struct ResolvedCond {
    bool no_witness = false;   // tau-inconsistent with the outer type
    ClosureType combined;      // partial type over ctx + ybar (when !no_witness)
    int rank = 0;
};

struct Eliminator {
    const Network& net;
    const EliminationOptions& opts;
    Signature sigma;
    EliminationReport report;
    bool cb_net = false;
    std::string netk;

    CatalogPtr cat(int k) const {
        return enumerate_complete_closure_types(sigma, k, opts.delta, opts.catalog);
    }

    void record_constant(const std::string& kind, const std::string& body, const Value& v,
                         const Provenance& prov) {
        report.constants.push_back(kind + " " + body + " = " + v.str() + " [" + prov.str() + "]");
    }

    // --- conditioning resolution against a fixed outer type ---------------

    struct Builder {
        std::vector<int> parent;
        std::vector<int> outer_of; // var -> final outer position or -1
        Signature sig;
        std::vector<std::map<std::vector<int>, bool>> lits;
        std::map<std::string, int> by_name; // ctx and placed ybar names
        bool dead = false;

        int root() const {
            for (size_t v = 0; v < parent.size(); ++v)
                if (parent[v] < 0) return static_cast<int>(v);
            return -1;
        }
        int add_var(int par) {
            parent.push_back(par);
            outer_of.push_back(-1);
            return static_cast<int>(parent.size()) - 1;
        }
        bool add_lit(int rel, std::vector<int> tuple, bool pol) {
            auto [it, fresh] = lits[rel].emplace(std::move(tuple), pol);
            return fresh || it->second == pol;
        }
    };

    // collect the conditioning constraints: closure-type parts and tree-edge
    // parts; anything else is outside the theorem's hypotheses
    void flatten_condition(const FormulaPtr& chi, std::vector<const TypeCond*>& types,
                           std::vector<std::pair<std::string, std::string>>& edges) {
        if (chi->kind == FKind::Type) {
            types.push_back(chi->type.get());
            return;
        }
        if (chi->kind == FKind::Atom && chi->sym == Signature::tree_symbol) {
            edges.emplace_back(chi->vars[0], chi->vars[1]);
            return;
        }
        if (chi->kind == FKind::Conn && chi->sym == "and") {
            for (const auto& a : chi->args) flatten_condition(a, types, edges);
            return;
        }
        fail(Errc::UnsupportedAggregation,
             "conditioning formula must be a closure type over the tree (closed{...}, "
             "root/childofroot/atlevel/child), got: " +
                 chi->str());
    }

    ResolvedCond resolve_condition(const FormulaPtr& chi, const ClosureType& q,
                                   const std::vector<std::string>& ctx,
                                   const std::vector<std::string>& ys) {
        std::vector<const TypeCond*> types;
        std::vector<std::pair<std::string, std::string>> edges;
        flatten_condition(chi, types, edges);

        Builder b;
        b.parent = q.parent;
        b.outer_of.assign(q.num_vars(), -1);
        b.sig = sigma;
        b.lits.resize(sigma.size());
        for (int i = 0; i < q.num_outer; ++i) {
            b.outer_of[i] = i;
            b.by_name[ctx[i]] = i;
        }
        for (int r = 0; r < q.sig.size(); ++r) {
            int t = sigma.find(q.sig.name(r));
            for (const auto& [tuple, pol] : q.lits[r]) b.lits[t].emplace(tuple, pol);
        }

        ResolvedCond dead;
        dead.no_witness = true;

        for (const TypeCond* tc : types) {
            const ClosureType& t = tc->type;
            std::vector<int> image(t.num_vars(), -1);
            image[t.root_var()] = b.root();
            for (size_t pos = 0; pos < tc->outer.size(); ++pos) {
                auto it = b.by_name.find(tc->outer[pos]);
                if (it != b.by_name.end()) image[pos] = it->second;
            }
            // force ancestors of mapped variables upward
            bool changed = true;
            while (changed) {
                changed = false;
                for (int v = 0; v < t.num_vars(); ++v) {
                    if (image[v] < 0 || t.parent[v] < 0) continue;
                    int pu = b.parent[image[v]];
                    if (pu < 0) return dead; // would sit above the root
                    if (image[t.parent[v]] < 0) {
                        image[t.parent[v]] = pu;
                        changed = true;
                    } else if (image[t.parent[v]] != pu) {
                        return dead;
                    }
                }
            }
            // place the rest top-down as fresh variables
            std::vector<int> order;
            {
                std::vector<int> queue{t.root_var()};
                for (size_t h = 0; h < queue.size(); ++h) {
                    for (int v = 0; v < t.num_vars(); ++v)
                        if (t.parent[v] == queue[h]) queue.push_back(v);
                    order.push_back(queue[h]);
                }
            }
            for (int v : order)
                if (image[v] < 0) image[v] = b.add_var(image[t.parent[v]]);
            // injectivity = the distinctness literals of the type
            {
                std::set<int> s(image.begin(), image.end());
                if (s.size() != image.size()) return dead;
            }
            for (size_t pos = 0; pos < tc->outer.size(); ++pos) {
                auto [it, fresh] = b.by_name.emplace(tc->outer[pos], image[pos]);
                if (!fresh && it->second != image[pos]) return dead;
            }
            for (int r = 0; r < t.sig.size(); ++r) {
                int tr = sigma.find(t.sig.name(r));
                if (tr < 0) fail(Errc::SignatureMismatch, t.sig.name(r) + " outside the network");
                for (const auto& [tuple, pol] : t.lits[r]) {
                    std::vector<int> mapped(tuple.size());
                    for (size_t i = 0; i < tuple.size(); ++i) mapped[i] = image[tuple[i]];
                    if (!b.add_lit(tr, std::move(mapped), pol)) return dead;
                }
            }
        }

        // edge constraints: u parent of v
        bool progress = true;
        std::vector<std::pair<std::string, std::string>> todo = edges;
        while (progress && !todo.empty()) {
            progress = false;
            std::vector<std::pair<std::string, std::string>> rest;
            for (auto& [u, v] : todo) {
                auto iu = b.by_name.find(u), iv = b.by_name.find(v);
                if (iu != b.by_name.end() && iv != b.by_name.end()) {
                    if (b.parent[iv->second] != iu->second) return dead;
                    progress = true;
                } else if (iu != b.by_name.end()) {
                    b.by_name[v] = b.add_var(iu->second);
                    progress = true;
                } else if (iv != b.by_name.end()) {
                    int pv = b.parent[iv->second];
                    if (pv < 0) return dead;
                    b.by_name[u] = pv;
                    progress = true;
                } else {
                    rest.emplace_back(u, v);
                }
            }
            todo = std::move(rest);
        }
        if (!todo.empty())
            fail(Errc::UnsupportedAggregation, "conditioning does not pin variable " + todo[0].first);

        // every bound variable must be pinned and distinct
        std::set<int> yvars;
        for (const auto& y : ys) {
            auto it = b.by_name.find(y);
            if (it == b.by_name.end())
                fail(Errc::UnsupportedAggregation, "conditioning does not pin variable " + y);
            if (!yvars.insert(it->second).second) return dead;
        }
        // bound variables colliding with outer positions have no closure type
        for (const auto& y : ys)
            if (b.outer_of[b.by_name[y]] >= 0) return dead;

        // assemble: outer order = ctx then ys
        int k = q.num_outer;
        int m = static_cast<int>(ys.size());
        for (int j = 0; j < m; ++j) b.outer_of[b.by_name[ys[j]]] = k + j;
        int n = static_cast<int>(b.parent.size());
        std::vector<int> remap(n, -1);
        for (int v = 0; v < n; ++v)
            if (b.outer_of[v] >= 0) remap[v] = b.outer_of[v];
        int next = k + m;
        for (int v = 0; v < n; ++v)
            if (remap[v] < 0) remap[v] = next++;
        std::vector<int> parent(n, -1);
        for (int v = 0; v < n; ++v)
            if (b.parent[v] >= 0) parent[remap[v]] = remap[b.parent[v]];
        std::vector<std::map<std::vector<int>, bool>> lits(sigma.size());
        for (int r = 0; r < sigma.size(); ++r)
            for (const auto& [tuple, pol] : b.lits[r]) {
                std::vector<int> mapped(tuple.size());
                for (size_t i = 0; i < tuple.size(); ++i) mapped[i] = remap[tuple[i]];
                lits[r].emplace(std::move(mapped), pol);
            }
        ResolvedCond out;
        out.combined = ClosureType::make(k + m, std::move(parent), sigma, std::move(lits));
        out.rank = rank_over_suffix(out.combined, m);
        return out;
    }

    // is the conditioning formula itself free of non-tree literals
    bool condition_over_tau(const FormulaPtr& chi) {
        std::vector<const TypeCond*> types;
        std::vector<std::pair<std::string, std::string>> edges;
        flatten_condition(chi, types, edges);
        for (const TypeCond* tc : types)
            for (const auto& m : tc->type.lits)
                if (!m.empty()) return false;
        return true;
    }

    // --- recursion ----------------------------------------------------------

    ClosureBasicFormula rec(const FormulaPtr& f, const std::vector<std::string>& ctx) {
        CatalogPtr catalog = cat(static_cast<int>(ctx.size()));
        ClosureBasicFormula out;
        out.outer_vars = ctx;
        out.cases.reserve(catalog->size());

        if (f->kind == FKind::Agg) {
            std::vector<Value> values = agg_values(f, ctx, *catalog);
            for (size_t i = 0; i < catalog->size(); ++i)
                out.cases.emplace_back((*catalog)[i], values[i]);
            return out;
        }
        if (f->kind == FKind::Conn) {
            std::vector<ClosureBasicFormula> sub;
            sub.reserve(f->args.size());
            for (const auto& a : f->args) sub.push_back(rec(a, ctx));
            for (size_t i = 0; i < catalog->size(); ++i) {
                std::vector<Value> vals(sub.size());
                for (size_t j = 0; j < sub.size(); ++j) vals[j] = sub[j].cases[i].second;
                out.cases.emplace_back((*catalog)[i], f->conn->fn(vals));
            }
            return out;
        }
        // aggregation-free leaves: the value on any world of type q equals
        // the value on q's witness realization
        for (size_t i = 0; i < catalog->size(); ++i) {
            auto [A, tuple] = witness((*catalog)[i]);
            Valuation v;
            for (size_t j = 0; j < ctx.size(); ++j) v[ctx[j]] = tuple[j];
            out.cases.emplace_back((*catalog)[i], evaluate(A, *f, v));
        }
        return out;
    }

    std::vector<Value> agg_values(const FormulaPtr& f, const std::vector<std::string>& ctx,
                                  const Catalog& catalog) {
        const auto& F = *f->agg;
        const auto& ys = f->vars;
        const int m = static_cast<int>(f->args.size());

        if (F.cls == AggClass::Neither)
            fail(Errc::UnsupportedAggregation,
                 F.name + " is neither continuous nor admissible; it cannot be asymptotically "
                          "eliminated");

        std::vector<std::string> inner_ctx = ctx;
        for (const auto& y : ys) inner_ctx.push_back(y);
        std::vector<ClosureBasicFormula> inner;
        inner.reserve(m);
        for (const auto& a : f->args) inner.push_back(rec(a, inner_ctx));
        CatalogPtr inner_cat = cat(static_cast<int>(inner_ctx.size()));

        AggLedgerEntry ledger;
        ledger.agg = F.name;
        ledger.cls = agg_class_name(F.cls);
        ledger.ranks.assign(m, 0);

        std::vector<Value> values;
        values.reserve(catalog.size());
        for (const auto& q : catalog) {
            AggCase acase;
            acase.outer_type = q.display(ctx);
            std::vector<std::vector<CtParam>> params(m);
            std::vector<std::vector<Value>> determined(m);
            bool empty_slot = false;
            std::vector<int> slot_rank(m, 0);
            bool inexact_params = false;

            for (int i = 0; i < m && !empty_slot; ++i) {
                ResolvedCond rc = resolve_condition(f->conds[i], q, ctx, ys);
                if (rc.no_witness) {
                    empty_slot = true;
                    break;
                }
                ledger.ranks[i] = std::max(ledger.ranks[i], rc.rank);
                slot_rank[i] = rc.rank;
                // positivity: over tau, or rank 0
                if (!condition_over_tau(f->conds[i]) && rc.rank > 0)
                    fail(Errc::PositivityUnknown,
                         "conditioning type of positive rank with non-tree literals");

                auto exts = complete_extensions(rc.combined, *inner_cat);
                if (exts.empty()) {
                    empty_slot = true;
                    break;
                }
                std::map<std::string, std::pair<Rational, Rational>> grouped; // c.str -> (c, alpha)
                for (const ClosureType* s : exts) {
                    size_t idx = static_cast<size_t>(s - inner_cat->data());
                    Value c = inner[i].cases[idx].second;
                    if (rc.rank == 0) {
                        determined[i].push_back(c);
                        continue;
                    }
                    Value alpha = class_proportion(*s, q.num_outer);
                    if (!alpha.is_exact() || !c.is_exact()) inexact_params = true;
                    Rational ar = approx_rat(alpha);
                    auto [it, fresh] =
                        grouped.emplace(c.str(), std::make_pair(approx_rat(c), ar));
                    if (!fresh) it->second.second += ar;
                }
                for (auto& [cs, pr] : grouped) {
                    params[i].push_back({pr.first, pr.second});
                    acase.params.emplace_back(rational_to_string(pr.first),
                                              rational_to_string(pr.second));
                }
            }
            bool all_rank0 = !empty_slot;
            bool any_rank0 = false;
            if (!empty_slot)
                for (int i = 0; i < m; ++i) {
                    if (slot_rank[i] > 0) all_rank0 = false;
                    if (slot_rank[i] == 0) any_rank0 = true;
                }

            if (empty_slot) {
                // some conditioning set is empty: the semantics give 0
                acase.limit = "0 (no witnesses)";
                ledger.cases.push_back(acase);
                values.push_back(Value::zero());
                continue;
            }

            Value value;
            if (all_rank0) {
                // witnesses are uniquely determined: evaluate F exactly
                value = F.fn(determined);
            } else if (any_rank0) {
                fail(Errc::UnsupportedAggregation,
                     F.name + " mixes determined and growing conditioning sets across slots");
            } else {
                if (F.cls == AggClass::Admissible) {
                    if (!cb_net)
                        fail(Errc::UnsupportedAggregation,
                             F.name + " is only admissible; positive-rank elimination needs a "
                                      "closure-basic network");
                    // zero-proportion classes are exactly empty in the limit
                    // for closure-basic networks, so they may be dropped
                    for (auto& slot : params) {
                        std::vector<CtParam> kept;
                        for (auto& pr : slot)
                            if (pr.alpha > 0) kept.push_back(pr);
                        slot = std::move(kept);
                    }
                }
                if (inexact_params)
                    report.warnings.push_back("irrational parameters fed to " + F.name +
                                              "; limit computed in floating point");
                value = F.ct_limit(params);
            }
            acase.limit = value.str();
            ledger.cases.push_back(acase);
            values.push_back(value);
        }
        report.ledger.push_back(std::move(ledger));
        return values;
    }

    // limiting proportion of the witness class s among the conditioning
    // witnesses, relative to the fixed outer part; the balance constant of
    // (s, s|tau, s|prefix) computed by the rank-1 chain product
    Value class_proportion(const ClosureType& s, int ctx_outer) {
        std::vector<int> prefix(ctx_outer);
        for (int i = 0; i < ctx_outer; ++i) prefix[i] = i;
        if (cb_net) {
            std::string key = "prop|" + s.key() + "|" + std::to_string(ctx_outer) + "|" + netk;
            Value cached;
            if (memo_get(key, cached)) return cached;
            // the self-contained transform keeps the variable order, so the
            // new-variable flags align with the product's tuple indices
            auto cl = s.var_closure(prefix);
            std::vector<bool> is_new(s.num_vars(), true);
            for (int v : cl) is_new[v] = false;
            Value v = theta_product(net, s, [&](const std::vector<int>& tuple) {
                for (int x : tuple)
                    if (is_new[x]) return true;
                return false;
            });
            memo_put(key, v);
            return v;
        }
        if (!opts.mc_fallback)
            fail(Errc::NotClosureBasic, "exact constants need closure-basic thetas");
        // Monte Carlo: proportion of skeleton witnesses landing in class s
        ClosureType q = restrict_vars(s, prefix);
        ClosureType chi_tau = tau_part(s);
        BalanceConstant bc = mc_balance(net, s, chi_tau, q, opts);
        report.warnings.push_back("empirical constant, asymptotics unverified: " + s.display() +
                                  " [" + bc.prov.str() + "]");
        return bc.value;
    }
};

} // namespace

EliminationResult eliminate(const Network& net, const FormulaPtr& phi,
                            const EliminationOptions& opts) {
    Network copy = net;
    if (copy.levels.size() != copy.nodes.size()) validate(copy);
    Eliminator e{copy, opts, copy.sig(), {}, copy.closure_basic(), net_key(copy)};
    e.report.input = phi->str();
    std::vector<std::string> ctx = phi->free_vars;
    for (const auto& extra : phi->needed_vars)
        if (std::find(ctx.begin(), ctx.end(), extra) == ctx.end()) ctx.push_back(extra);
    std::sort(ctx.begin(), ctx.end());
    EliminationResult result;
    result.cbf = e.rec(phi, ctx);
    e.report.output = result.cbf.display();
    result.report = std::move(e.report);
    return result;
}

EquivalenceCheck check_asymptotic_equivalence(const Network& net, const FormulaPtr& phi,
                                              const FormulaPtr& psi,
                                              const std::function<TreeGenConfig(long long)>& family,
                                              const std::vector<long long>& ns, long long samples,
                                              double eps, uint64_t seed) {
    std::set<std::string> allvars(phi->free_vars.begin(), phi->free_vars.end());
    allvars.insert(psi->free_vars.begin(), psi->free_vars.end());
    for (const auto& v : phi->needed_vars) allvars.insert(v);
    for (const auto& v : psi->needed_vars) allvars.insert(v);
    std::vector<std::string> vars(allvars.begin(), allvars.end());
    EquivalenceCheck out;
    for (long long n : ns) {
        auto tree = std::make_shared<Tree>(Tree::generate(family(n)));
        // valuation scheme: all nodes for one variable on small trees,
        // otherwise a seeded subsample of injective tuples
        std::vector<std::vector<int>> tuples;
        if (vars.empty()) {
            tuples.push_back({});
        } else if (vars.size() == 1 && tree->size() <= 10000) {
            for (int v = 0; v < tree->size(); ++v) tuples.push_back({v});
        } else {
            out.subsampled = true;
            uint64_t h = ctr_rng::hash_words({seed, static_cast<uint64_t>(n), 0x7u});
            for (int i = 0; i < 256; ++i) {
                std::vector<int> t;
                std::set<int> used;
                for (size_t j = 0; j < vars.size(); ++j) {
                    h = ctr_rng::mix(h);
                    int node = static_cast<int>(h % tree->size());
                    while (used.count(node)) node = (node + 1) % tree->size();
                    used.insert(node);
                    t.push_back(node);
                }
                tuples.push_back(std::move(t));
            }
        }
        long long ok = 0;
        double sup_sum = 0;
        for (long long s = 0; s < samples; ++s) {
            SigmaStructure A = sample_world(
                tree, net, ctr_rng::hash_words({seed, static_cast<uint64_t>(n), static_cast<uint64_t>(s)}));
            double sup = 0;
            for (const auto& t : tuples) {
                Valuation v;
                for (size_t j = 0; j < vars.size(); ++j) v[vars[j]] = t[j];
                double a = evaluate(A, *phi, v).dbl();
                double b = evaluate(A, *psi, v).dbl();
                sup = std::max(sup, std::abs(a - b));
            }
            if (sup <= eps) ++ok;
            sup_sum += sup;
        }
        out.rows.push_back({n, static_cast<double>(ok) / static_cast<double>(samples),
                            sup_sum / static_cast<double>(samples)});
    }
    return out;
}

std::string EliminationReport::to_json() const {
    nlohmann::ordered_json j;
    j["input"] = input;
    j["output"] = output;
    j["ledger"] = nlohmann::ordered_json::array();
    for (const auto& e : ledger) {
        nlohmann::ordered_json je;
        je["agg"] = e.agg;
        je["class"] = e.cls;
        je["ranks"] = e.ranks;
        je["cases"] = nlohmann::ordered_json::array();
        for (const auto& c : e.cases) {
            nlohmann::ordered_json jc;
            jc["outer_type"] = c.outer_type;
            jc["params"] = nlohmann::ordered_json::array();
            for (const auto& [cv, av] : c.params) jc["params"].push_back({cv, av});
            jc["limit"] = c.limit;
            je["cases"].push_back(jc);
        }
        j["ledger"].push_back(je);
    }
    j["constants"] = constants;
    j["warnings"] = warnings;
    return j.dump(2);
}

} // namespace pla
