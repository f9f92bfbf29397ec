#include "pla/registry.hpp"
#include "pla/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace pla {

const char* agg_class_name(AggClass c) {
    switch (c) {
    case AggClass::Continuous: return "continuous";
    case AggClass::Admissible: return "admissible";
    case AggClass::Neither: return "neither";
    }
    return "?";
}

namespace {

Value lukasiewicz_not(const std::vector<Value>& a) { return Value::one() - a[0]; }

Value fold_min(const std::vector<Value>& a) {
    Value m = a[0];
    for (size_t i = 1; i < a.size(); ++i) m = vmin(m, a[i]);
    return m;
}

Value fold_max(const std::vector<Value>& a) {
    Value m = a[0];
    for (size_t i = 1; i < a.size(); ++i) m = vmax(m, a[i]);
    return m;
}

Value lukasiewicz_implies(const std::vector<Value>& a) {
    return vmin(Value::one(), Value::one() - a[0] + a[1]);
}

Value fold_product(const std::vector<Value>& a) {
    Value p = a[0];
    for (size_t i = 1; i < a.size(); ++i) p = p * a[i];
    return p;
}

// affine(a, b, x) = clamp01(a*x + b); the slope and offset arrive as the
// first two arguments so the connective stays a plain map [0,1]^3 -> [0,1]
Value affine_clamp(const std::vector<Value>& a) {
    return (a[0] * a[2] + a[1]).clamp01();
}

// Sequence aggregation helpers work on grouped (value, count) pairs so that
// e.g. the mean of half a million 0/1 entries costs two rational operations.
struct Grouped {
    std::vector<std::pair<Value, long long>> groups;
    long long total = 0;
    bool all_exact = true;
};

Grouped group(const std::vector<Value>& seq) {
    Grouped g;
    g.total = static_cast<long long>(seq.size());
    // linear probing over the distinct values; sequences in this logic
    // concentrate on a handful of values (often just 0 and 1), and the 0/1
    // fast path keeps half-million-entry conditioning sets cheap
    long long zeros = 0, ones = 0;
    std::vector<std::pair<Value, long long>> rest;
    for (const auto& v : seq) {
        if (!v.is_exact()) g.all_exact = false;
        if (v.is_zero()) {
            ++zeros;
            continue;
        }
        if (v.is_one()) {
            ++ones;
            continue;
        }
        bool found = false;
        if (rest.size() <= 512) { // beyond this, dedup costs more than it saves
            for (auto& [w, c] : rest)
                if (w.is_exact() == v.is_exact() &&
                    (v.is_exact() ? w.rat() == v.rat() : w.dbl() == v.dbl())) {
                    ++c;
                    found = true;
                    break;
                }
        }
        if (!found) rest.emplace_back(v, 1);
    }
    if (zeros) g.groups.emplace_back(Value::zero(), zeros);
    if (ones) g.groups.emplace_back(Value::one(), ones);
    for (auto& e : rest) g.groups.push_back(std::move(e));
    return g;
}

Value agg_am(const std::vector<std::vector<Value>>& in) {
    Grouped g = group(in[0]);
    if (g.all_exact) {
        Rational sum = 0;
        for (auto& [v, c] : g.groups) sum += v.rat() * c;
        return Value::exact(sum / g.total);
    }
    double sum = 0;
    for (auto& [v, c] : g.groups) sum += v.dbl() * c;
    return Value::approx(sum / static_cast<double>(g.total));
}

Value agg_max(const std::vector<std::vector<Value>>& in) { return fold_max(in[0]); }
Value agg_min(const std::vector<std::vector<Value>>& in) { return fold_min(in[0]); }

// exact geometric mean when the root is rational and the sequence short
Value agg_gm(const std::vector<std::vector<Value>>& in) {
    Grouped g = group(in[0]);
    for (auto& [v, c] : g.groups)
        if (v.is_zero()) return Value::zero();
    if (g.all_exact && g.total <= 4096) {
        Rational prod = 1;
        for (auto& [v, c] : g.groups)
            for (long long i = 0; i < c; ++i) prod *= v.rat();
        Rational root;
        if (exact_kth_root(prod, static_cast<unsigned>(g.total), root)) return Value::exact(root);
        return Value::approx(std::pow(to_double(prod), 1.0 / static_cast<double>(g.total)));
    }
    double logsum = 0;
    for (auto& [v, c] : g.groups) logsum += std::log(v.dbl()) * static_cast<double>(c);
    return Value::approx(std::exp(logsum / static_cast<double>(g.total)));
}

Value agg_tsum(const std::vector<std::vector<Value>>& in) {
    Grouped g = group(in[0]);
    if (g.all_exact) {
        Rational sum = 0;
        for (auto& [v, c] : g.groups) {
            sum += v.rat() * c;
            if (sum >= 1) return Value::one();
        }
        return Value::exact(sum);
    }
    double sum = 0;
    for (auto& [v, c] : g.groups) sum += v.dbl() * c;
    return sum >= 1.0 ? Value::approx(1.0) : Value::approx(sum);
}

Value agg_noisyor(const std::vector<std::vector<Value>>& in) {
    Grouped g = group(in[0]);
    if (g.all_exact && g.total <= 4096) {
        Rational prod = 1;
        for (auto& [v, c] : g.groups)
            for (long long i = 0; i < c; ++i) prod *= (Rational(1) - v.rat());
        return Value::exact(Rational(1) - prod);
    }
    double prod = 1;
    for (auto& [v, c] : g.groups) prod *= std::pow(1.0 - v.dbl(), static_cast<double>(c));
    return Value::approx(1.0 - prod);
}

Value limit_am(const std::vector<std::vector<CtParam>>& ps) {
    Rational s = 0;
    for (const auto& p : ps[0]) s += p.c * p.alpha;
    return Value::exact(s);
}

Value limit_gm(const std::vector<std::vector<CtParam>>& ps) {
    for (const auto& p : ps[0])
        if (p.c == 0 && p.alpha > 0) return Value::zero();
    // prod c_j^alpha_j; exact when a single cluster carries all the mass
    Rational single = -1;
    bool one_cluster = true;
    for (const auto& p : ps[0])
        if (p.alpha > 0) {
            if (single >= 0 && p.c != single) one_cluster = false;
            single = p.c;
        }
    if (one_cluster && single >= 0) return Value::exact(single);
    double prod = 1;
    for (const auto& p : ps[0])
        if (p.alpha > 0) prod *= std::pow(to_double(p.c), to_double(p.alpha));
    return Value::approx(prod);
}

Value limit_max(const std::vector<std::vector<CtParam>>& ps) {
    Rational best = 0;
    bool any = false;
    for (const auto& p : ps[0])
        if (p.alpha > 0) {
            best = any ? std::max(best, p.c) : p.c;
            any = true;
        }
    if (!any) fail(Errc::BadParameters, "max limit needs a positive-weight cluster");
    return Value::exact(best);
}

Value limit_min(const std::vector<std::vector<CtParam>>& ps) {
    Rational best = 0;
    bool any = false;
    for (const auto& p : ps[0])
        if (p.alpha > 0) {
            best = any ? std::min(best, p.c) : p.c;
            any = true;
        }
    if (!any) fail(Errc::BadParameters, "min limit needs a positive-weight cluster");
    return Value::exact(best);
}

} // namespace

AggregationPtr make_lengthpow(const Rational& beta) {
    if (beta <= 0 || beta > 1) fail(Errc::BadParameters, "lengthpow exponent must be in (0,1]");
    auto a = std::make_shared<AggregationFunction>();
    a->name = beta == 1 ? "lengthpow" : "lengthpow(" + rational_to_string(beta) + ")";
    a->arity = 1;
    a->cls = AggClass::Continuous;
    a->fn = [beta](const std::vector<std::vector<Value>>& in) -> Value {
        long long len = static_cast<long long>(in[0].size());
        // |p|^-beta: exact for integer beta or a perfect rational root
        if (denominator(beta) == 1) {
            Rational r = 1;
            for (Int i = 0; i < numerator(beta); ++i) r /= len;
            return Value::exact(r);
        }
        Int num = numerator(beta), den = denominator(beta);
        Rational inner = 1;
        for (Int i = 0; i < num; ++i) inner /= len;
        Rational root;
        if (exact_kth_root(inner, den.convert_to<unsigned>(), root)) return Value::exact(root);
        return Value::approx(std::pow(static_cast<double>(len), -to_double(beta)));
    };
    a->ct_limit = [](const std::vector<std::vector<CtParam>>&) { return Value::zero(); };
    return a;
}

Registry::Registry() {
    auto conn = [&](std::string name, int arity, bool cont, auto fn) {
        auto c = std::make_shared<Connective>();
        c->name = std::move(name);
        c->arity = arity;
        c->continuous = cont;
        c->fn = fn;
        conns_.push_back(std::move(c));
    };
    conn("not", 1, true, lukasiewicz_not);
    conn("and", -1, true, fold_min);
    conn("or", -1, true, fold_max);
    conn("implies", 2, true, lukasiewicz_implies);
    conn("product", -1, true, fold_product);
    conn("affine", 3, true, affine_clamp);

    auto agg = [&](std::string name, AggClass cls, auto fn, auto limit) {
        auto a = std::make_shared<AggregationFunction>();
        a->name = std::move(name);
        a->arity = 1;
        a->cls = cls;
        a->fn = fn;
        if (cls != AggClass::Neither) a->ct_limit = limit;
        aggs_.push_back(std::move(a));
    };
    std::function<Value(const std::vector<std::vector<CtParam>>&)> none;
    agg("max", AggClass::Admissible, agg_max, limit_max);
    agg("min", AggClass::Admissible, agg_min, limit_min);
    agg("am", AggClass::Continuous, agg_am, limit_am);
    agg("gm", AggClass::Continuous, agg_gm, limit_gm);
    agg("tsum", AggClass::Neither, agg_tsum, none);
    agg("noisyor", AggClass::Neither, agg_noisyor, none);
    aggs_.push_back(make_lengthpow(Rational(1)));
}

const Registry& Registry::builtin() {
    static Registry r;
    return r;
}

ConnectivePtr Registry::connective(const std::string& name) const {
    for (const auto& c : conns_)
        if (c->name == name) return c;
    return nullptr;
}

AggregationPtr Registry::aggregation(const std::string& name) const {
    for (const auto& a : aggs_)
        if (a->name == name) return a;
    if (name.rfind("lengthpow(", 0) == 0 && name.back() == ')')
        return make_lengthpow(rational_from_string(name.substr(10, name.size() - 11)));
    return nullptr;
}

bool Registry::is_reserved(const std::string& name) const {
    if (connective(name)) return true;
    if (name == "lengthpow") return true;
    for (const auto& a : aggs_)
        if (a->name == name) return true;
    static const char* keywords[] = {"exists", "forall", "closed",      "cbf", "root",
                                     "child",  "atlevel", "childofroot", "T",   "F",
                                     "true",   "false"};
    for (const char* k : keywords)
        if (name == k) return true;
    return false;
}

} // namespace pla
