#include "pla/experiment.hpp"
#include "pla/errors.hpp"
#include "pla/parser.hpp"
#include "pla/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

namespace pla {

namespace {

std::string substitute_n(const std::string& tpl, long long n) {
    std::string out;
    for (size_t i = 0; i < tpl.size(); ++i) {
        if (tpl[i] == '$' && i + 1 < tpl.size() && tpl[i + 1] == 'n') {
            out += std::to_string(n);
            ++i;
        } else {
            out += tpl[i];
        }
    }
    return out;
}

// valuation tuples for one query on one tree
std::vector<std::vector<int>> schedule(const QuerySpec& q, const Tree& tree, uint64_t seed,
                                       bool& subsampled) {
    std::vector<std::string> vars = q.formula->needed_vars;
    if (q.scheme == QuerySpec::Scheme::Fixed) {
        std::vector<int> t;
        for (const auto& v : vars) {
            auto it = q.fixed.find(v);
            if (it == q.fixed.end()) fail(Errc::UnboundVariable, v + " missing from fixed valuation");
            t.push_back(it->second);
        }
        return {t};
    }
    if (vars.empty()) return {{}};
    bool all = q.scheme == QuerySpec::Scheme::All ||
               (q.scheme == QuerySpec::Scheme::Auto && vars.size() == 1 && tree.size() <= 10000);
    if (all) {
        if (vars.size() != 1) fail(Errc::BadConfig, "scheme=all needs a single free variable");
        std::vector<std::vector<int>> out;
        for (int v = 0; v < tree.size(); ++v) out.push_back({v});
        return out;
    }
    // seeded uniform subsample of 256 injective tuples, recorded in the row
    subsampled = true;
    std::vector<std::vector<int>> out;
    uint64_t h = ctr_rng::hash_words({seed, 0x5bULL});
    for (int i = 0; i < 256; ++i) {
        std::vector<int> t;
        std::vector<int> used;
        for (size_t j = 0; j < vars.size(); ++j) {
            h = ctr_rng::mix(h);
            int node = static_cast<int>(h % tree.size());
            while (std::find(used.begin(), used.end(), node) != used.end())
                node = (node + 1) % tree.size();
            used.push_back(node);
            t.push_back(node);
        }
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace

ExperimentSpec load_experiment_spec(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        fail(Errc::BadInput, std::string("experiment spec: ") + e.what());
    }
    ExperimentSpec spec;
    spec.family = j.at("family").get<std::string>();
    for (const auto& n : j.at("n_list")) spec.n_list.push_back(n.get<long long>());
    for (size_t i = 1; i < spec.n_list.size(); ++i)
        if (spec.n_list[i] <= spec.n_list[i - 1]) fail(Errc::BadInput, "n_list must strictly increase");
    spec.samples = j.value("samples", 500);
    if (spec.samples < 100) fail(Errc::BadInput, "need at least 100 samples");
    spec.seed = j.value("seed", 1);
    spec.bucket_width = j.value("bucket_width", 0.01);
    spec.out_path = j.value("out", "");
    if (j.contains("network_file")) {
        spec.network_file = j["network_file"].get<std::string>();
        spec.net = network_from_file(spec.network_file);
    } else if (j.contains("network")) {
        std::istringstream is(j["network"].get<std::string>());
        spec.net = parse_network(is);
    } else {
        fail(Errc::BadInput, "experiment spec needs network_file or network");
    }
    Signature sig = spec.net.sig();
    for (const auto& q : j.at("queries")) {
        QuerySpec qs;
        qs.text = q.at("formula").get<std::string>();
        qs.name = q.value("name", qs.text);
        ParseOptions opts;
        opts.sig = &sig;
        qs.formula = parse_formula(qs.text, opts);
        std::string scheme = q.value("scheme", "auto");
        if (scheme == "auto")
            qs.scheme = QuerySpec::Scheme::Auto;
        else if (scheme == "all")
            qs.scheme = QuerySpec::Scheme::All;
        else if (scheme == "subsample")
            qs.scheme = QuerySpec::Scheme::Subsample;
        else if (scheme == "fixed")
            qs.scheme = QuerySpec::Scheme::Fixed;
        else
            fail(Errc::BadInput, "unknown scheme " + scheme);
        if (q.contains("at"))
            for (auto it = q["at"].begin(); it != q["at"].end(); ++it)
                qs.fixed[it.key()] = it.value().get<int>();
        spec.queries.push_back(std::move(qs));
    }
    return spec;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, int threads) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    ExperimentResult result;
    result.bucket_width = spec.bucket_width;
    const int buckets = static_cast<int>(std::ceil(1.0 / spec.bucket_width)) + 1;

    for (long long n : spec.n_list) {
        auto tree = std::make_shared<Tree>(tree_from_spec(substitute_n(spec.family, n)));
        for (size_t qi = 0; qi < spec.queries.size(); ++qi) {
            const QuerySpec& q = spec.queries[qi];
            bool subsampled = false;
            auto tuples =
                schedule(q, *tree, ctr_rng::hash_words({spec.seed, static_cast<uint64_t>(n), qi}), subsampled);
            std::vector<std::string> vars = q.formula->needed_vars;

            // per-sample work items with deterministic seeds; merged by index
            std::vector<std::vector<long long>> counts(spec.samples,
                                                       std::vector<long long>(buckets, 0));
            std::vector<double> sums(spec.samples, 0.0);
            std::atomic<long long> next{0};
            auto worker = [&]() {
                while (true) {
                    long long s = next.fetch_add(1);
                    if (s >= spec.samples) return;
                    SigmaStructure A = sample_world(
                        tree, spec.net,
                        ctr_rng::hash_words({spec.seed, static_cast<uint64_t>(n), static_cast<uint64_t>(s)}));
                    for (const auto& t : tuples) {
                        Valuation v;
                        for (size_t j = 0; j < vars.size(); ++j) v[vars[j]] = t[j];
                        double val = evaluate(A, *q.formula, v).dbl();
                        int b = std::min(buckets - 1, static_cast<int>(val / spec.bucket_width));
                        counts[s][b]++;
                        sums[s] += val;
                    }
                }
            };
            std::vector<std::thread> pool;
            for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();

            HistogramRow row;
            row.n = n;
            row.query = q.name;
            row.subsampled = subsampled;
            row.mass.assign(buckets, 0.0);
            double total_sum = 0;
            long long total_count = 0;
            for (long long s = 0; s < spec.samples; ++s) {
                for (int b = 0; b < buckets; ++b) row.mass[b] += static_cast<double>(counts[s][b]);
                total_sum += sums[s];
                total_count += static_cast<long long>(tuples.size());
            }
            for (int b = 0; b < buckets; ++b) row.mass[b] /= static_cast<double>(total_count);
            row.mean = total_sum / static_cast<double>(total_count);
            row.count = total_count;
            // local modes with at least 5% of the mass
            for (int b = 0; b < buckets; ++b) {
                double left = b > 0 ? row.mass[b - 1] : 0.0;
                double right = b + 1 < buckets ? row.mass[b + 1] : 0.0;
                if (row.mass[b] >= 0.05 && row.mass[b] >= left && row.mass[b] >= right)
                    row.concentration.push_back((b + 0.5) * spec.bucket_width);
            }
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

std::string ExperimentResult::to_json(const ExperimentSpec& spec) const {
    nlohmann::ordered_json j;
    j["family"] = spec.family;
    j["samples"] = spec.samples;
    j["seed"] = spec.seed;
    j["bucket_width"] = bucket_width;
    j["results"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json jr;
        jr["n"] = r.n;
        jr["query"] = r.query;
        jr["mean"] = r.mean;
        jr["count"] = r.count;
        jr["subsampled"] = r.subsampled;
        jr["concentration"] = r.concentration;
        nlohmann::ordered_json hist = nlohmann::ordered_json::array();
        for (size_t b = 0; b < r.mass.size(); ++b)
            if (r.mass[b] > 0)
                hist.push_back({b * bucket_width, r.mass[b]});
        jr["histogram"] = hist;
        j["results"].push_back(jr);
    }
    return j.dump(2);
}

std::string ExperimentResult::to_csv() const {
    std::ostringstream os;
    os << "n,query,bucket_lo,mass\n";
    for (const auto& r : rows)
        for (size_t b = 0; b < r.mass.size(); ++b)
            if (r.mass[b] > 0) os << r.n << "," << r.query << "," << b * bucket_width << "," << r.mass[b] << "\n";
    return os.str();
}

std::string ExperimentResult::to_gnuplot() const {
    std::ostringstream os;
    os << "# gnuplot script for the experiment histograms\n";
    os << "set style data histeps\nset xlabel 'value'\nset ylabel 'mass'\n";
    os << "plot '-' using 1:2 title 'histogram'\n";
    for (const auto& r : rows)
        for (size_t b = 0; b < r.mass.size(); ++b)
            if (r.mass[b] > 0) os << b * bucket_width << " " << r.mass[b] << "\n";
    os << "e\n";
    return os.str();
}

} // namespace pla
