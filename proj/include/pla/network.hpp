#pragma once

#include "pla/formula.hpp"
#include "pla/registry.hpp"
#include "pla/signature.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace pla {

// A PLA*-network over sigma based on tau: a DAG on the non-tree symbols with
// one formula theta_R over par(R) and tau per symbol. theta_R's variables
// are positional: x1..x<arity>.
struct Network {
    struct Node {
        std::string name;
        int arity = 1;
        std::vector<std::string> parents;
        FormulaPtr theta;
    };
    std::vector<Node> nodes;
    std::vector<int> levels; // filled by validate(); longest-path layering

    Signature sig() const;               // all non-tree symbols in file order
    Signature sig_up_to_level(int l) const;
    int find(const std::string& name) const;
    int height() const;                  // -1 for the empty network

    // every theta is a closure-basic formula or a constant
    bool closure_basic() const;

    // induced subnetwork on a parent-closed symbol subset
    Network subnetwork(const std::vector<std::string>& symbols) const;
};

// Topological levels; rejects cycles, thetas mentioning non-parents, arity
// mismatches, and closure-basic cases that are not complete over par + tau.
std::vector<int> validate(Network& net);

Network parse_network(std::istream& in, const Registry& reg = Registry::builtin());
Network network_from_file(const std::string& path);
void write_network(std::ostream& out, const Network& net);

std::vector<std::string> theta_var_names(int arity);

} // namespace pla
