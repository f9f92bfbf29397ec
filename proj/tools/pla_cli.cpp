#include "pla/battery.hpp"
#include "pla/distribution.hpp"
#include "pla/eliminate.hpp"
#include "pla/errors.hpp"
#include "pla/experiment.hpp"
#include "pla/pagerank.hpp"
#include "pla/parser.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace pla;

Valuation parse_at(const std::string& at) {
    Valuation v;
    if (at.empty()) return v;
    std::istringstream is(at);
    std::string item;
    while (std::getline(is, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) fail(Errc::BadInput, "expected var=node in --at");
        v[item.substr(0, eq)] = std::stoi(item.substr(eq + 1));
    }
    return v;
}

FormulaPtr parse_with_net(const std::string& text, const Network& net) {
    Signature sig = net.sig();
    ParseOptions opts;
    opts.sig = &sig;
    return parse_formula(text, opts);
}

void write_out(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path);
    if (!out) fail(Errc::BadInput, "cannot write " + path);
    out << content;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PLA* toolkit: evaluation, lifted sampling and exact inference over "
                 "tree-structured worlds, and the asymptotic-elimination compiler"};
    app.require_subcommand(1);

    std::string tree_spec, net_path, formula_text, at_text, report_path, out_path, graph_path, spec_path;
    uint64_t seed = 1;
    long long count = 100000;
    int delta = 2;
    int k_stages = 5;
    bool mc_fallback = false;

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a formula on one sampled world");
    eval_cmd->add_option("--tree", tree_spec, "tree spec (uniform:delta=2,n=3 | file:path | ...)")
        ->required();
    eval_cmd->add_option("--net", net_path, "network file");
    eval_cmd->add_option("--formula", formula_text, "PLA* formula")->required();
    eval_cmd->add_option("--at", at_text, "valuation var=node,var=node");
    eval_cmd->add_option("--seed", seed, "world seed");

    auto* exact_cmd = app.add_subcommand("exact", "exact event probability from the full table");
    exact_cmd->add_option("--tree", tree_spec)->required();
    exact_cmd->add_option("--net", net_path)->required();
    exact_cmd->add_option("--query", formula_text)->required();
    exact_cmd->add_option("--at", at_text);

    auto* sample_cmd = app.add_subcommand("sample", "Monte Carlo event probability");
    sample_cmd->add_option("--tree", tree_spec)->required();
    sample_cmd->add_option("--net", net_path)->required();
    sample_cmd->add_option("--query", formula_text)->required();
    sample_cmd->add_option("--at", at_text);
    sample_cmd->add_option("--seed", seed);
    sample_cmd->add_option("--count", count, "number of sampled worlds");

    auto* elim_cmd = app.add_subcommand("eliminate", "compile to a closure-basic formula");
    elim_cmd->add_option("--net", net_path)->required();
    elim_cmd->add_option("--formula", formula_text)->required();
    elim_cmd->add_option("--delta", delta, "tree height bound");
    elim_cmd->add_flag("--mc-fallback", mc_fallback, "Monte Carlo constants for non-closure-basic thetas");
    elim_cmd->add_option("--report", report_path, "write the JSON report here");
    elim_cmd->add_option("--seed", seed);

    auto* exp_cmd = app.add_subcommand("experiment", "run a sampling experiment from a JSON spec");
    exp_cmd->add_option("--spec", spec_path)->required();
    std::string gnuplot_path;
    exp_cmd->add_option("--gnuplot", gnuplot_path, "also emit a gnuplot script");

    auto* check_cmd = app.add_subcommand("check", "ct-continuity battery over the built-in registry");
    check_cmd->add_option("--seed", seed);

    auto* pr_cmd = app.add_subcommand("pagerank", "staged PageRank encoded in PLA*");
    pr_cmd->add_option("--graph", graph_path, "edge list file: one 'u v' per line")->required();
    pr_cmd->add_option("--k", k_stages, "number of stages");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*eval_cmd) {
            auto tree = std::make_shared<Tree>(tree_from_spec(tree_spec));
            SigmaStructure A = net_path.empty()
                                   ? SigmaStructure(tree, Signature{})
                                   : sample_world(tree, network_from_file(net_path), seed);
            ParseOptions opts;
            Signature sig = A.sig();
            opts.sig = &sig;
            FormulaPtr f = parse_formula(formula_text, opts);
            std::cout << evaluate(A, *f, parse_at(at_text)).str() << "\n";
        } else if (*exact_cmd) {
            auto tree = std::make_shared<Tree>(tree_from_spec(tree_spec));
            Network net = network_from_file(net_path);
            auto dist = std::make_shared<ExactDistribution>(tree, net, 24);
            WorldDistribution wd;
            wd.exact = dist;
            auto p = event_probability(wd, *parse_with_net(formula_text, net), parse_at(at_text));
            std::cout << p.p.str() << "\n";
        } else if (*sample_cmd) {
            auto tree = std::make_shared<Tree>(tree_from_spec(tree_spec));
            Network net = network_from_file(net_path);
            WorldDistribution wd;
            wd.tree = tree;
            wd.net = &net;
            wd.seed = seed;
            wd.samples = count;
            auto p = event_probability(wd, *parse_with_net(formula_text, net), parse_at(at_text));
            std::cout << "estimate=" << p.mc.estimate << " se=" << p.mc.se
                      << " samples=" << p.mc.samples << "\n";
        } else if (*elim_cmd) {
            Network net = network_from_file(net_path);
            EliminationOptions opts;
            opts.delta = delta;
            opts.mc_fallback = mc_fallback;
            opts.seed = seed;
            auto res = eliminate(net, parse_with_net(formula_text, net), opts);
            std::cout << res.cbf.display() << "\n";
            if (!report_path.empty()) write_out(report_path, res.report.to_json());
        } else if (*exp_cmd) {
            std::ifstream in(spec_path);
            if (!in) fail(Errc::BadInput, "cannot open spec " + spec_path);
            std::stringstream buf;
            buf << in.rdbuf();
            ExperimentSpec spec = load_experiment_spec(buf.str());
            ExperimentResult res = run_experiment(spec);
            std::string base = spec.out_path.empty() ? "experiment" : spec.out_path;
            write_out(base + ".json", res.to_json(spec));
            write_out(base + ".csv", res.to_csv());
            if (!gnuplot_path.empty()) write_out(gnuplot_path, res.to_gnuplot());
            std::cout << "wrote " << base << ".json and " << base << ".csv\n";
        } else if (*check_cmd) {
            BatteryResult res = check_battery(seed);
            std::cout << res.table();
            if (!res.all_pass) return 3;
        } else if (*pr_cmd) {
            auto values = pagerank_demo(load_edge_list(graph_path), k_stages);
            Value sum = Value::zero();
            for (size_t i = 0; i < values.size(); ++i) {
                std::cout << i << " " << values[i].str() << "\n";
                sum = sum + values[i];
            }
            std::cout << "# sum " << sum.str() << "\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
