#include "pla/network.hpp"
#include "pla/errors.hpp"
#include "pla/parser.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace pla {

std::vector<std::string> theta_var_names(int arity) {
    std::vector<std::string> names;
    for (int i = 1; i <= arity; ++i) names.push_back("x" + std::to_string(i));
    return names;
}

Signature Network::sig() const {
    Signature s;
    for (const auto& n : nodes) s.add(n.name, n.arity);
    return s;
}

int Network::find(const std::string& name) const {
    for (size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].name == name) return static_cast<int>(i);
    return -1;
}

int Network::height() const {
    int h = -1;
    for (int l : levels) h = std::max(h, l);
    return h;
}

Signature Network::sig_up_to_level(int l) const {
    Signature s;
    for (size_t i = 0; i < nodes.size(); ++i)
        if (levels[i] <= l) s.add(nodes[i].name, nodes[i].arity);
    return s;
}

bool Network::closure_basic() const {
    for (const auto& n : nodes)
        if (n.theta->kind != FKind::Cbf && n.theta->kind != FKind::Const) return false;
    return true;
}

Network Network::subnetwork(const std::vector<std::string>& symbols) const {
    std::set<std::string> keep(symbols.begin(), symbols.end());
    Network sub;
    for (const auto& n : nodes) {
        if (!keep.count(n.name)) continue;
        for (const auto& p : n.parents)
            if (!keep.count(p)) fail(Errc::BadInput, "subnetwork is not parent-closed at " + n.name);
        sub.nodes.push_back(n);
    }
    validate(sub);
    return sub;
}

std::vector<int> validate(Network& net) {
    std::map<std::string, int> index;
    for (size_t i = 0; i < net.nodes.size(); ++i) {
        if (index.count(net.nodes[i].name)) fail(Errc::BadInput, "duplicate symbol " + net.nodes[i].name);
        if (net.nodes[i].arity < 1) fail(Errc::BadInput, "arity must be >= 1");
        index[net.nodes[i].name] = static_cast<int>(i);
    }
    // longest-path layering; cycle detection by depth overflow
    net.levels.assign(net.nodes.size(), -1);
    std::function<int(int, int)> level_of = [&](int i, int depth) -> int {
        if (depth > static_cast<int>(net.nodes.size()))
            fail(Errc::CyclicDependency, "at symbol " + net.nodes[i].name);
        if (net.levels[i] >= 0) return net.levels[i];
        int l = 0;
        for (const auto& p : net.nodes[i].parents) {
            auto it = index.find(p);
            if (it == index.end()) fail(Errc::UnknownSymbol, "parent " + p + " of " + net.nodes[i].name);
            l = std::max(l, 1 + level_of(it->second, depth + 1));
        }
        return net.levels[i] = l;
    };
    for (size_t i = 0; i < net.nodes.size(); ++i) level_of(static_cast<int>(i), 0);

    for (const auto& n : net.nodes) {
        if (!n.theta) fail(Errc::BadInput, "missing theta for " + n.name);
        // free variables live among the positional x1..xk
        auto names = theta_var_names(n.arity);
        for (const auto& v : n.theta->needed_vars)
            if (std::find(names.begin(), names.end(), v) == names.end())
                fail(Errc::ArityMismatch, "theta for " + n.name + " uses variable " + v +
                                              " outside x1..x" + std::to_string(n.arity));
        // theta may mention parents and the tree only
        std::set<std::string> allowed(n.parents.begin(), n.parents.end());
        for (const auto& sym : mentioned_symbols(*n.theta)) {
            if (!allowed.count(sym.name))
                fail(Errc::IllegalSymbolInTheta, n.name + "'s theta mentions " + sym.name);
            int pi = index.at(sym.name);
            if (net.nodes[pi].arity != sym.arity)
                fail(Errc::ArityMismatch, sym.name + " used with arity " + std::to_string(sym.arity));
        }
    }
    // closure-basic thetas: normalize case types to the signature par(R),
    // then require completeness and pairwise distinct cases
    for (auto& n : net.nodes) {
        if (n.theta->kind != FKind::Cbf) continue;
        Signature par_sig;
        for (const auto& p : n.parents) {
            int pi = index.at(p);
            par_sig.add(net.nodes[pi].name, net.nodes[pi].arity);
        }
        ClosureBasicFormula norm;
        norm.outer_vars = n.theta->cbf->cbf.outer_vars;
        std::set<std::string> seen;
        for (const auto& [type, c] : n.theta->cbf->cbf.cases) {
            ClosureType t = type.sig == par_sig ? type : restrict_sig(type, par_sig);
            if (!t.complete())
                fail(Errc::BadInput, "closure-basic case for " + n.name +
                                         " is not a complete closure type over its parents");
            if (!seen.insert(t.key()).second)
                fail(Errc::BadInput, "duplicate closure-basic case for " + n.name);
            norm.cases.emplace_back(std::move(t), c);
        }
        if (static_cast<int>(norm.outer_vars.size()) != n.arity)
            fail(Errc::ArityMismatch, "closure-basic theta arity for " + n.name);
        n.theta = f_cbf(std::move(norm));
    }
    return net.levels;
}

Network parse_network(std::istream& in, const Registry& reg) {
    Network net;
    std::string line;
    if (!std::getline(in, line) || line != "network v1") fail(Errc::BadInput, "expected 'network v1' header");
    std::vector<std::pair<std::string, std::string>> thetas;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "relation") {
            Network::Node n;
            ls >> n.name;
            std::string item;
            while (ls >> item) {
                if (item.rfind("arity=", 0) == 0)
                    n.arity = std::stoi(item.substr(6));
                else if (item.rfind("parents=", 0) == 0) {
                    std::istringstream ps(item.substr(8));
                    std::string p;
                    while (std::getline(ps, p, ','))
                        if (!p.empty()) n.parents.push_back(p);
                } else {
                    fail(Errc::BadInput, "unexpected token '" + item + "' in relation line");
                }
            }
            if (n.name.empty()) fail(Errc::BadInput, "relation line without a name");
            net.nodes.push_back(std::move(n));
        } else if (word == "theta") {
            std::string name, eq;
            ls >> name >> eq;
            if (eq != "=") fail(Errc::BadInput, "expected 'theta NAME = <formula>'");
            std::string rest;
            std::getline(ls, rest);
            thetas.emplace_back(name, rest);
        } else {
            fail(Errc::BadInput, "unexpected line: " + line);
        }
    }
    Signature sig = net.sig();
    for (auto& [name, text] : thetas) {
        int i = net.find(name);
        if (i < 0) fail(Errc::UnknownSymbol, "theta for undeclared relation " + name);
        ParseOptions opts;
        opts.sig = &sig;
        opts.registry = &reg;
        net.nodes[i].theta = parse_formula(text, opts);
    }
    validate(net);
    return net;
}

Network network_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::BadInput, "cannot open network file " + path);
    return parse_network(in);
}

void write_network(std::ostream& out, const Network& net) {
    out << "network v1\n";
    for (const auto& n : net.nodes) {
        out << "relation " << n.name << " arity=" << n.arity << " parents=";
        for (size_t i = 0; i < n.parents.size(); ++i) {
            if (i) out << ",";
            out << n.parents[i];
        }
        out << "\n";
    }
    for (const auto& n : net.nodes) out << "theta " << n.name << " = " << n.theta->str() << "\n";
}

} // namespace pla
