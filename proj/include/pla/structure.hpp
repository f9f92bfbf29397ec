#pragma once

#include "pla/signature.hpp"
#include "pla/tree.hpp"

#include <span>
#include <unordered_set>
#include <vector>

namespace pla {

struct TupleHash {
    size_t operator()(const std::vector<int>& t) const {
        size_t h = t.size();
        for (int v : t) h ^= static_cast<size_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};

// A possible world: a sigma-structure whose tau-reduct is exactly `tree`.
// Unary relations are stored as bitmaps, higher arities as tuple sets.
class SigmaStructure {
public:
    SigmaStructure(TreePtr tree, Signature sig);

    const Tree& tree() const { return *tree_; }
    TreePtr tree_ptr() const { return tree_; }
    const Signature& sig() const { return sig_; }

    bool holds(int rel, std::span<const int> tuple) const;
    void set(int rel, std::span<const int> tuple, bool value);
    void clear(int rel);
    long long tuple_count(int rel) const;

    SigmaStructure reduct(const Signature& sub) const;

private:
    void check(int rel, std::span<const int> tuple) const;
    TreePtr tree_;
    Signature sig_;
    std::vector<std::vector<bool>> unary_;
    std::vector<std::unordered_set<std::vector<int>, TupleHash>> tuples_;
};

} // namespace pla
