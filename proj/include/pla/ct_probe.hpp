#pragma once

#include "pla/registry.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace pla {

struct CtProbeResult {
    std::vector<double> per_length;  // max pair discrepancy at each length
    double max_discrepancy = 0.0;    // at the largest length
    std::optional<double> max_limit_gap; // |F(seq) - ct_limit| when a limit exists
};

// Randomized probe of ct-continuity: builds pairs of convergence-testing
// sequences for the given per-slot parameters (one side pinned to the
// cluster points, the other drawn inside a window shrinking with the
// length; zero-weight clusters appear in the second side with o(L) many
// entries) and measures |F(p) - F(q)|. Requires sum(alpha) = 1 per slot and
// strictly increasing lengths.
CtProbeResult ct_probe(const AggregationFunction& F,
                       const std::vector<std::vector<CtParam>>& params,
                       int trials, const std::vector<long long>& lengths, uint64_t seed);

} // namespace pla
