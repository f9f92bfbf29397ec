#pragma once

#include "pla/formula.hpp"
#include "pla/value.hpp"

#include <utility>
#include <vector>

namespace pla {

// Staged PageRank (no damping factor) encoded as formulas over a binary
// link relation and evaluated by the formula evaluator:
//   PR_0(x)     = lengthpow(x = x : y : T)
//   PR_{k+1}(x) = tsum(and(x = x, product(PR_k(y), out_inv(y))) : y : L(y,x))
// with out_inv(y) = lengthpow(y = y : z : L(y,z)). Every node must have an
// out-link (DanglingNode otherwise); values for all nodes at stage k.
std::vector<Value> pagerank_demo(const std::vector<std::pair<int, int>>& edges, int k);

// the staged formula itself, over link symbol L
FormulaPtr pagerank_formula(int k);

std::vector<std::pair<int, int>> load_edge_list(const std::string& path);

} // namespace pla
