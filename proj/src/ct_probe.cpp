#include "pla/ct_probe.hpp"
#include "pla/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pla {

namespace {

// one convergence-testing sequence of target length L for a slot's params
std::vector<Value> draw_sequence(const std::vector<CtParam>& params, long long L, bool pinned,
                                 std::mt19937_64& rng) {
    double window = 1.0 / std::sqrt(static_cast<double>(L));
    long long extra = static_cast<long long>(std::ceil(std::cbrt(static_cast<double>(L))));
    std::vector<Value> seq;
    // counts: floor(alpha * L), remainder to the largest fractions
    std::vector<long long> count(params.size(), 0);
    std::vector<std::pair<Rational, size_t>> fracs;
    long long used = 0;
    for (size_t j = 0; j < params.size(); ++j) {
        Rational exactc = params[j].alpha * L;
        count[j] = numerator(exactc).convert_to<long long>() / denominator(exactc).convert_to<long long>();
        if (params[j].alpha > 0 && count[j] == 0) count[j] = 1;
        used += count[j];
        fracs.emplace_back(exactc - count[j], j);
    }
    std::sort(fracs.begin(), fracs.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (size_t i = 0; used < L && i < fracs.size(); ++i, ++used) count[fracs[i].second]++;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (size_t j = 0; j < params.size(); ++j) {
        long long c = count[j];
        if (params[j].alpha == 0) c = pinned ? 0 : extra; // o(L) entries at a null cluster
        double center = to_double(params[j].c);
        for (long long i = 0; i < c; ++i) {
            if (pinned) {
                seq.push_back(Value::exact(params[j].c));
            } else {
                double lo = std::max(0.0, center - window);
                double hi = std::min(1.0, center + window);
                seq.push_back(Value::approx(lo + (hi - lo) * u01(rng)));
            }
        }
    }
    if (seq.empty()) seq.push_back(Value::exact(params[0].c));
    return seq;
}

} // namespace

CtProbeResult ct_probe(const AggregationFunction& F,
                       const std::vector<std::vector<CtParam>>& params,
                       int trials, const std::vector<long long>& lengths, uint64_t seed) {
    if (static_cast<int>(params.size()) != F.arity)
        fail(Errc::BadParameters, "one parameter list per aggregated sequence");
    for (const auto& slot : params) {
        if (slot.empty()) fail(Errc::BadParameters, "empty parameter list");
        Rational sum = 0;
        for (const auto& p : slot) {
            if (p.c < 0 || p.c > 1 || p.alpha < 0 || p.alpha > 1)
                fail(Errc::BadParameters, "parameters live in [0,1]");
            sum += p.alpha;
        }
        if (sum != 1) fail(Errc::BadParameters, "cluster proportions must sum to 1");
    }
    for (size_t i = 1; i < lengths.size(); ++i)
        if (lengths[i] <= lengths[i - 1]) fail(Errc::BadParameters, "lengths must strictly increase");
    if (lengths.empty() || trials < 1) fail(Errc::BadParameters, "need lengths and trials");

    std::mt19937_64 rng(seed);
    CtProbeResult res;
    for (size_t li = 0; li < lengths.size(); ++li) {
        long long L = lengths[li];
        double worst = 0.0;
        double limit_gap = 0.0;
        for (int t = 0; t < trials; ++t) {
            std::vector<std::vector<Value>> p(F.arity), q(F.arity);
            for (int s = 0; s < F.arity; ++s) {
                p[s] = draw_sequence(params[s], L, true, rng);
                q[s] = draw_sequence(params[s], L, false, rng);
            }
            double fp = F.fn(p).dbl();
            double fq = F.fn(q).dbl();
            worst = std::max(worst, std::abs(fp - fq));
            if (F.ct_limit) {
                double lim = F.ct_limit(params).dbl();
                limit_gap = std::max(limit_gap, std::max(std::abs(fp - lim), std::abs(fq - lim)));
            }
        }
        res.per_length.push_back(worst);
        if (li + 1 == lengths.size()) {
            res.max_discrepancy = worst;
            if (F.ct_limit) res.max_limit_gap = limit_gap;
        }
    }
    return res;
}

} // namespace pla
