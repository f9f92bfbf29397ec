#include "pla/distribution.hpp"
#include "pla/errors.hpp"
#include "pla/rng.hpp"

#include <algorithm>
#include <cmath>

namespace pla {

namespace {

// all tuples over the tree in lexicographic node order
void for_each_tuple(int n, int arity, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> t(arity, 0);
    while (true) {
        fn(t);
        int pos = arity - 1;
        while (pos >= 0 && t[pos] == n - 1) t[pos--] = 0;
        if (pos < 0) return;
        t[pos]++;
    }
}

Value theta_value(const SigmaStructure& lower, const Formula& theta, const std::vector<int>& tuple) {
    Valuation v;
    auto names = theta_var_names(static_cast<int>(tuple.size()));
    for (size_t i = 0; i < tuple.size(); ++i) v[names[i]] = tuple[i];
    Value val = evaluate(lower, theta, v);
    if (val.is_exact() && (val.rat() < 0 || val.rat() > 1))
        fail(Errc::BadInput, "theta value outside [0,1]");
    return val;
}

} // namespace

ExactDistribution::ExactDistribution(TreePtr tree, const Network& net, int max_bits)
    : tree_(std::move(tree)), net_(net) {
    if (net_.levels.size() != net_.nodes.size()) validate(net_);
    if (max_bits > 30) fail(Errc::BadInput, "table cap beyond 2^30 worlds");
    const int n = tree_->size();
    int height = net_.height();
    for (int l = 0; l <= height; ++l)
        for (size_t r = 0; r < net_.nodes.size(); ++r) {
            if (net_.levels[r] != l) continue;
            long long count = 1;
            for (int i = 0; i < net_.nodes[r].arity; ++i) count *= n;
            if (static_cast<long long>(slots_.size()) + count > max_bits)
                fail(Errc::TooLarge, "relation-tuple slots exceed " + std::to_string(max_bits));
            for_each_tuple(n, net_.nodes[r].arity, [&](const std::vector<int>& t) {
                slots_.push_back({static_cast<int>(r), t});
                slot_level_.push_back(l);
            });
        }

    Signature full = net_.sig();
    prob_.assign(1, Value::one());
    size_t done = 0; // slots already fixed (low bits)
    for (int l = 0; l <= height; ++l) {
        size_t level_begin = done;
        while (done < slots_.size() && slot_level_[done] == l) ++done;
        size_t level_count = done - level_begin;
        if (level_count == 0) continue;
        std::vector<Value> next(prob_.size() << level_count);
        SigmaStructure lower(tree_, full);
        for (uint64_t base = 0; base < prob_.size(); ++base) {
            // materialize the lower-level world
            for (int r = 0; r < full.size(); ++r) lower.clear(r);
            for (size_t s = 0; s < level_begin; ++s)
                if ((base >> s) & 1) lower.set(slots_[s].rel, slots_[s].nodes, true);
            std::vector<Value> c(level_count);
            for (size_t j = 0; j < level_count; ++j) {
                const Slot& slot = slots_[level_begin + j];
                c[j] = theta_value(lower, *net_.nodes[slot.rel].theta, slot.nodes);
            }
            // expand by doubling per slot; no divisions
            std::vector<Value> ext{prob_[base]};
            for (size_t j = 0; j < level_count; ++j) {
                std::vector<Value> grown(ext.size() * 2);
                Value off = Value::one() - c[j];
                for (size_t m = 0; m < ext.size(); ++m) {
                    grown[m] = ext[m] * off;
                    grown[m + ext.size()] = ext[m] * c[j];
                }
                ext = std::move(grown);
            }
            for (uint64_t e = 0; e < ext.size(); ++e)
                next[(e << level_begin) | base] = std::move(ext[e]);
        }
        prob_ = std::move(next);
    }
}

ExactDistribution exact_distribution(TreePtr tree, const Network& net, int max_bits) {
    return ExactDistribution(std::move(tree), net, max_bits);
}

SigmaStructure ExactDistribution::world(uint64_t mask) const {
    SigmaStructure A(tree_, net_.sig());
    for (size_t s = 0; s < slots_.size(); ++s)
        if ((mask >> s) & 1) A.set(slots_[s].rel, slots_[s].nodes, true);
    return A;
}

Value ExactDistribution::total() const {
    Value t = Value::zero();
    for (const auto& p : prob_) t = t + p;
    return t;
}

Value ExactDistribution::event_mass(const Formula& phi, const Valuation& v) const {
    Value mass = Value::zero();
    SigmaStructure A(tree_, net_.sig());
    for (uint64_t mask = 0; mask < world_count(); ++mask) {
        if (prob_[mask].is_zero()) continue;
        for (int r = 0; r < net_.sig().size(); ++r) A.clear(r);
        for (size_t s = 0; s < slots_.size(); ++s)
            if ((mask >> s) & 1) A.set(slots_[s].rel, slots_[s].nodes, true);
        Value val = evaluate(A, phi, v);
        if (val.is_one())
            mass = mass + prob_[mask];
        else if (!val.is_zero())
            fail(Errc::NotZeroOne, "event formula evaluated to " + val.str());
    }
    return mass;
}

Value ExactDistribution::conditional(const Formula& phi, const Formula& given,
                                     const Valuation& v) const {
    Value num = Value::zero(), den = Value::zero();
    SigmaStructure A(tree_, net_.sig());
    for (uint64_t mask = 0; mask < world_count(); ++mask) {
        if (prob_[mask].is_zero()) continue;
        for (int r = 0; r < net_.sig().size(); ++r) A.clear(r);
        for (size_t s = 0; s < slots_.size(); ++s)
            if ((mask >> s) & 1) A.set(slots_[s].rel, slots_[s].nodes, true);
        Value g = evaluate(A, given, v);
        if (g.is_zero()) continue;
        if (!g.is_one()) fail(Errc::NotZeroOne, "conditioning event evaluated to " + g.str());
        den = den + prob_[mask];
        Value val = evaluate(A, phi, v);
        if (val.is_one())
            num = num + prob_[mask];
        else if (!val.is_zero())
            fail(Errc::NotZeroOne, "event formula evaluated to " + val.str());
    }
    if (den.is_zero()) fail(Errc::UnsatisfiablePair, "conditioning event has probability zero");
    return num / den;
}

Value ExactDistribution::marginal(const std::string& rel, const std::vector<int>& nodes) const {
    int r = net_.find(rel);
    if (r < 0) fail(Errc::UnknownSymbol, rel);
    size_t slot = slots_.size();
    for (size_t s = 0; s < slots_.size(); ++s)
        if (slots_[s].rel == r && slots_[s].nodes == nodes) slot = s;
    if (slot == slots_.size()) fail(Errc::BadInput, "tuple not in table");
    Value m = Value::zero();
    for (uint64_t mask = 0; mask < world_count(); ++mask)
        if ((mask >> slot) & 1) m = m + prob_[mask];
    return m;
}

std::vector<Value> ExactDistribution::marginal_table_up_to_level(int level) const {
    size_t keep = 0;
    while (keep < slots_.size() && slot_level_[keep] <= level) ++keep;
    std::vector<Value> out(1ull << keep, Value::zero());
    uint64_t low_mask = (1ull << keep) - 1;
    for (uint64_t mask = 0; mask < world_count(); ++mask)
        out[mask & low_mask] = out[mask & low_mask] + prob_[mask];
    return out;
}

SigmaStructure sample_world(TreePtr tree, const Network& net, uint64_t seed) {
    Network n = net;
    if (n.levels.size() != n.nodes.size()) validate(n);
    Signature full = n.sig();
    SigmaStructure A(tree, full);
    int height = n.height();
    const int tn = tree->size();
    for (int l = 0; l <= height; ++l) {
        // draws at level l read only lower levels; buffer the writes so the
        // level acts as a sequential barrier
        std::vector<std::pair<int, std::vector<int>>> pending;
        for (size_t r = 0; r < n.nodes.size(); ++r) {
            if (n.levels[r] != l) continue;
            auto names = theta_var_names(n.nodes[r].arity);
            const bool const_theta = n.nodes[r].theta->kind == FKind::Const;
            const Value const_val =
                const_theta ? Value::exact(n.nodes[r].theta->value) : Value::zero();
            Valuation v;
            for_each_tuple(tn, n.nodes[r].arity, [&](const std::vector<int>& t) {
                Value val = const_val;
                if (!const_theta) {
                    for (size_t i = 0; i < t.size(); ++i) v[names[i]] = t[i];
                    val = evaluate(A, *n.nodes[r].theta, v);
                }
                uint64_t h = ctr_rng::mix(ctr_rng::mix(ctr_rng::mix(seed ^ 0x706c61ULL) ^ l) ^ r);
                for (int x : t) h = ctr_rng::mix(h ^ static_cast<uint64_t>(x));
                bool hit;
                if (val.is_exact()) {
                    // exact dyadic comparison u/2^53 < c
                    const Rational& c = val.rat();
                    uint64_t u = ctr_rng::unit_numerator(h);
                    if (numerator(c) <= UINT64_MAX && denominator(c) <= UINT64_MAX) {
                        unsigned __int128 lhs =
                            static_cast<unsigned __int128>(u) * denominator(c).convert_to<uint64_t>();
                        unsigned __int128 rhs =
                            static_cast<unsigned __int128>(numerator(c).convert_to<uint64_t>()) << 53;
                        hit = lhs < rhs;
                    } else {
                        hit = Int(u) * denominator(c) < numerator(c) * (Int(1) << 53);
                    }
                } else {
                    hit = ctr_rng::to_unit(h) < val.dbl();
                }
                if (hit) pending.emplace_back(static_cast<int>(r), t);
            });
        }
        for (auto& [r, t] : pending) A.set(r, t, true);
    }
    return A;
}

McEstimate mc_event_probability(TreePtr tree, const Network& net, const Formula& phi,
                                const Valuation& v, long long samples, uint64_t seed) {
    long long hits = 0;
    for (long long s = 0; s < samples; ++s) {
        SigmaStructure A = sample_world(tree, net, ctr_rng::hash_words({seed, static_cast<uint64_t>(s)}));
        Value val = evaluate(A, phi, v);
        if (val.is_one())
            ++hits;
        else if (!val.is_zero())
            fail(Errc::NotZeroOne, "event formula evaluated to " + val.str());
    }
    McEstimate e;
    e.samples = samples;
    e.estimate = static_cast<double>(hits) / static_cast<double>(samples);
    e.se = std::sqrt(e.estimate * (1.0 - e.estimate) / static_cast<double>(samples));
    return e;
}

EventProbability event_probability(const WorldDistribution& dist, const Formula& phi,
                                   const Valuation& v) {
    EventProbability out;
    if (dist.exact) {
        out.exact = true;
        out.p = dist.exact->event_mass(phi, v);
        return out;
    }
    if (!dist.net || !dist.tree) fail(Errc::BadInput, "sampler distribution needs a tree and network");
    out.exact = false;
    out.mc = mc_event_probability(dist.tree, *dist.net, phi, v, dist.samples, dist.seed);
    return out;
}

} // namespace pla
