#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pla {

// How a generated tree family relates to the growth assumptions the theory
// needs: `Full` is the strong homogeneity assumption, `Light` only requires
// all leaves on the bottom level, `Violating` families break both on purpose.
enum class AssumptionTag { Full, Light, Violating };

struct TreeGenConfig {
    enum class Profile { Uniform, Schedule, Custom };
    Profile profile = Profile::Uniform;
    int delta = 1;     // height; all generated leaves sit on level delta
    long long n = 1;   // scale parameter
    std::vector<long long> schedule; // per-level child counts, size == delta
    // child count for (level, index of node within its level, n)
    std::function<long long(int, long long, long long)> custom;
    AssumptionTag tag = AssumptionTag::Full;
    std::string name = "uniform";

    static TreeGenConfig uniform(int delta, long long n);
    static TreeGenConfig schedule_profile(std::vector<long long> counts);
    // root has n children; for even n half of them have n children each and
    // the rest are leaves; for odd n, floor(n/3) have n children each.
    static TreeGenConfig mixed_leaves(long long n);
    // all leaves on level 2; odd n: one child of the root has 2n^3 children;
    // even n: two children of the root have n^3 children; the rest have n.
    static TreeGenConfig few_big(long long n);
};

// Finite rooted tree. Node ids are dense 0..N-1; generated trees are in BFS
// order with root 0, trees built from explicit parent lists keep their ids.
// Immutable after construction.
class Tree {
public:
    static Tree from_parents(const std::vector<std::optional<int>>& parents);
    static Tree generate(const TreeGenConfig& cfg);

    static Tree load(std::istream& in);
    void save(std::ostream& out) const;

    int size() const { return static_cast<int>(parent_.size()); }
    int root() const { return root_; }
    int parent(int v) const { check(v); return parent_[v]; } // -1 at the root
    int level(int v) const { check(v); return level_[v]; }
    int height() const { return height_; }
    const std::vector<int>& children(int v) const { check(v); return children_[v]; }
    const std::vector<int>& nodes_at_level(int l) const;

    bool is_ancestor(int a, int b) const; // strict: a above b
    int ancestor_at_level(int v, int l) const; // walk up from v to level l

    // B together with the root and all ancestors of members of B; sorted ids.
    std::vector<int> closure(const std::vector<int>& nodes) const;

    // number of subtrees (substructures) of *this rooted at a and isomorphic
    // to `pattern`; child-multiset DP, exponential worst case at desk scale
    long long count_rooted_subtrees(int a, const Tree& pattern) const;

    bool operator==(const Tree& o) const { return parent_ == o.parent_; }

private:
    void check(int v) const;
    std::vector<int> parent_;
    std::vector<int> level_;
    std::vector<std::vector<int>> children_;
    std::vector<std::vector<int>> by_level_;
    int root_ = 0;
    int height_ = 0;
};

using TreePtr = std::shared_ptr<const Tree>;

// Parse a generator/file spec like "uniform:delta=2,n=50", "mixedleaves:n=40",
// "fewbig:n=21", "schedule:counts=3;2", "file:path".
Tree tree_from_spec(const std::string& spec);
TreeGenConfig tree_config_from_spec(const std::string& spec);

} // namespace pla
