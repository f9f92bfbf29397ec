#pragma once

#include "pla/closure_type.hpp"

#include <memory>

namespace pla {

struct CatalogOptions {
    int var_cap = 8;   // maximum |xy| per type
    int bits_cap = 22; // maximum number of sigma\tau literal slots per type
};

using Catalog = std::vector<ClosureType>;
using CatalogPtr = std::shared_ptr<const Catalog>;

// All complete closure types over `sig` in `num_outer` outer variables with
// respect to trees of height <= delta, up to logical equivalence, in
// deterministic canonical order. Cached per (sig, num_outer, delta).
CatalogPtr enumerate_complete_closure_types(const Signature& sig, int num_outer, int delta,
                                            const CatalogOptions& opts = {});

// catalog types extending a (possibly incomplete) type
std::vector<const ClosureType*> complete_extensions(const ClosureType& base, const Catalog& catalog);

} // namespace pla
