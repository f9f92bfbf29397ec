#pragma once

#include "pla/ct_probe.hpp"

#include <string>
#include <vector>

namespace pla {

struct BatteryRow {
    std::string function;
    std::string probe;
    std::string expectation; // "small" or "large"
    double measured = 0.0;
    bool pass = false;
};

struct BatteryResult {
    std::vector<BatteryRow> rows;
    bool all_pass = true;
    std::string table() const;
};

// Probes the built-in registry against its declared classes: the continuity
// witness for max/min (expected to fail continuity), all-positive-weight
// admissibility probes for max/min (expected small), random probes for
// am/gm/length^-beta (expected small, and close to the declared ct-limits),
// and admissibility failures for tsum/noisy-or.
BatteryResult check_battery(uint64_t seed = 20240708, long long max_length = 10000);

} // namespace pla
