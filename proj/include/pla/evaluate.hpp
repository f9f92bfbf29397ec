#pragma once

#include "pla/formula.hpp"
#include "pla/structure.hpp"

#include <map>
#include <string>

namespace pla {

using Valuation = std::map<std::string, int>;

// Value of phi on A under v, following the semantics clause by clause:
// constants; equality and atoms 0/1; connectives pointwise; aggregations
// collect, per slot, the inner values over all bound tuples whose
// conditioning value is exactly 1, and return 0 when any conditioning set
// is empty. v must cover phi's needed variables (free variables plus the
// conditioning formulas' extras).
Value evaluate(const SigmaStructure& A, const Formula& phi, const Valuation& v = {});

} // namespace pla
