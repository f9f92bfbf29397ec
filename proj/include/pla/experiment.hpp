#pragma once

#include "pla/distribution.hpp"
#include "pla/network.hpp"
#include "pla/tree.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pla {

struct QuerySpec {
    std::string name;
    std::string text;
    FormulaPtr formula;
    enum class Scheme { Auto, All, Subsample, Fixed } scheme = Scheme::Auto;
    Valuation fixed;
};

struct ExperimentSpec {
    std::string family;              // tree spec template, $n substituted
    std::vector<long long> n_list;   // strictly increasing
    std::string network_file;
    Network net;
    std::vector<QuerySpec> queries;
    long long samples = 500;         // >= 100
    uint64_t seed = 1;
    std::string out_path;
    double bucket_width = 0.01;
};

struct HistogramRow {
    long long n = 0;
    std::string query;
    std::vector<double> mass;        // bucket masses, sum 1
    double mean = 0.0;
    long long count = 0;             // evaluations behind the histogram
    std::vector<double> concentration; // bucket midpoints of local modes
    bool subsampled = false;
};

struct ExperimentResult {
    double bucket_width = 0.01;
    std::vector<HistogramRow> rows;
    std::string to_json(const ExperimentSpec& spec) const;
    std::string to_csv() const;
    std::string to_gnuplot() const;
};

ExperimentSpec load_experiment_spec(const std::string& json_text);

// For each n: generate the tree, sample `samples` worlds (deterministic
// per-item seeds, so thread count never changes the result), evaluate each
// query at its scheduled valuations, and histogram the values.
ExperimentResult run_experiment(const ExperimentSpec& spec, int threads = 0);

} // namespace pla
