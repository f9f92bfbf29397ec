#include "pla/battery.hpp"

#include <random>
#include <sstream>

namespace pla {

namespace {

constexpr double kSmall = 0.02;
constexpr double kLarge = 0.5;

std::vector<CtParam> random_params(std::mt19937_64& rng, bool allow_zero_alpha) {
    std::uniform_int_distribution<int> kdist(1, 3);
    int k = kdist(rng);
    std::uniform_int_distribution<int> num(0, 8);
    std::vector<CtParam> ps;
    std::vector<Rational> weights;
    Rational total = 0;
    for (int j = 0; j < k; ++j) {
        Rational c(num(rng), 8);
        Rational w(1 + num(rng), 9);
        ps.push_back({c, w});
        total += w;
    }
    for (auto& p : ps) p.alpha = p.alpha / total;
    if (allow_zero_alpha && k > 1) {
        // shift all mass away from the last cluster
        Rational moved = ps.back().alpha;
        ps.back().alpha = 0;
        ps.front().alpha += moved;
    }
    return ps;
}

} // namespace

BatteryResult check_battery(uint64_t seed, long long max_length) {
    const Registry& reg = Registry::builtin();
    BatteryResult out;
    std::mt19937_64 rng(seed);
    std::vector<long long> lengths{max_length / 100, max_length / 10, max_length};

    auto run = [&](const std::string& fname, const std::vector<CtParam>& ps,
                   const std::string& label, bool expect_small) {
        auto F = reg.aggregation(fname);
        auto res = ct_probe(*F, {ps}, 8, lengths, rng());
        BatteryRow row;
        row.function = fname;
        row.probe = label;
        row.expectation = expect_small ? "small" : "large";
        row.measured = res.max_discrepancy;
        row.pass = expect_small ? res.max_discrepancy <= kSmall : res.max_discrepancy >= kLarge;
        // for classes with a declared limit and full-weight clusters, the
        // sampled values must also approach the limit
        if (expect_small && res.max_limit_gap) {
            bool has_zero = false;
            for (const auto& p : ps)
                if (p.alpha == 0) has_zero = true;
            bool continuous = F->cls == AggClass::Continuous;
            if ((continuous || !has_zero) && *res.max_limit_gap > kSmall) row.pass = false;
        }
        out.rows.push_back(row);
        out.all_pass = out.all_pass && row.pass;
    };

    // the witness from the continuity counterexample: clusters 0 and 1 with
    // proportions 1 and 0
    std::vector<CtParam> witness{{Rational(0), Rational(1)}, {Rational(1), Rational(0)}};
    std::vector<CtParam> witness_min{{Rational(1), Rational(1)}, {Rational(0), Rational(0)}};
    run("max", witness, "continuity witness c=(0,1) a=(1,0)", false);
    run("min", witness_min, "continuity witness c=(1,0) a=(1,0)", false);

    for (int i = 0; i < 4; ++i) {
        auto ps = random_params(rng, false);
        run("max", ps, "admissibility probe (all a>0) #" + std::to_string(i + 1), true);
        run("min", ps, "admissibility probe (all a>0) #" + std::to_string(i + 1), true);
    }
    for (int i = 0; i < 4; ++i) {
        auto ps = random_params(rng, i >= 2);
        std::string label = std::string("random probe") + (i >= 2 ? " (with a=0 cluster)" : "") +
                            " #" + std::to_string(i + 1);
        run("am", ps, label, true);
        run("gm", ps, label, true);
        run("lengthpow", ps, label, true);
        run("lengthpow(1/2)", ps, label, true);
    }

    // tsum and noisy-or are not even admissible: an all-positive-weight
    // probe at cluster 0 separates the pinned and windowed sides
    std::vector<CtParam> zero_cluster{{Rational(0), Rational(1)}};
    run("tsum", zero_cluster, "admissibility probe c=(0) a=(1)", false);
    run("noisyor", zero_cluster, "admissibility probe c=(0) a=(1)", false);

    return out;
}

std::string BatteryResult::table() const {
    std::ostringstream os;
    for (const auto& r : rows) {
        os << (r.pass ? "PASS" : "FAIL") << "  " << r.function;
        for (size_t i = r.function.size(); i < 16; ++i) os << ' ';
        os << "discrepancy=" << r.measured << " (want " << r.expectation << ")  " << r.probe << "\n";
    }
    os << (all_pass ? "battery: all probes behaved as declared\n"
                    : "battery: some probe contradicted a declared class\n");
    return os.str();
}

} // namespace pla
