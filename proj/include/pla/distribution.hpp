#pragma once

#include "pla/evaluate.hpp"
#include "pla/network.hpp"
#include "pla/structure.hpp"

#include <cstdint>
#include <memory>
#include <optional>

namespace pla {

// Full table of the distribution the network induces on the expansions of
// one tree. Worlds are bit masks over the relation-tuple slots, lower
// network levels in lower bits. Probabilities are exact rationals as long
// as every theta value is rational; an irrational theta (gm paths) switches
// the table to doubles, with a declared 1e-12 tolerance on the sum-to-1
// check.
class ExactDistribution {
public:
    struct Slot {
        int rel; // index into net.sig()
        std::vector<int> nodes;
    };

    ExactDistribution(TreePtr tree, const Network& net, int max_bits);

    const Network& net() const { return net_; }
    const Tree& tree() const { return *tree_; }
    int bits() const { return static_cast<int>(slots_.size()); }
    uint64_t world_count() const { return 1ull << bits(); }
    const std::vector<Slot>& slots() const { return slots_; }

    const Value& prob(uint64_t mask) const { return prob_[mask]; }
    SigmaStructure world(uint64_t mask) const;
    Value total() const;

    // exact mass of a 0/1-valued event; NotZeroOne if some world evaluates
    // strictly inside (0,1)
    Value event_mass(const Formula& phi, const Valuation& v) const;
    Value conditional(const Formula& phi, const Formula& given, const Valuation& v) const;
    Value marginal(const std::string& rel, const std::vector<int>& nodes) const;

    // marginalize onto the sub-signature of levels <= l (a prefix of the
    // slot order); result is indexed by the low-bit prefix masks
    std::vector<Value> marginal_table_up_to_level(int level) const;

private:
    TreePtr tree_;
    Network net_;
    std::vector<Slot> slots_;
    std::vector<int> slot_level_;
    std::vector<Value> prob_;
};

ExactDistribution exact_distribution(TreePtr tree, const Network& net, int max_bits = 24);

// Ancestral sampler: level by level, each tuple is an independent draw with
// probability A'(theta_R(abar)) given the lower levels; the stream for a
// tuple is derived from (seed, level, relation, tuple), so the sample is
// independent of enumeration order. Deterministic per seed.
SigmaStructure sample_world(TreePtr tree, const Network& net, uint64_t seed);

struct McEstimate {
    double estimate = 0.0;
    double se = 0.0;
    long long samples = 0;
};

McEstimate mc_event_probability(TreePtr tree, const Network& net, const Formula& phi,
                                const Valuation& v, long long samples, uint64_t seed);

// The spec-level distribution handle: exact table or seeded sampler.
struct WorldDistribution {
    std::shared_ptr<const ExactDistribution> exact; // set in exact mode
    TreePtr tree;
    const Network* net = nullptr;
    uint64_t seed = 0;
    long long samples = 100000;
};

struct EventProbability {
    bool exact = false;
    Value p;       // exact mode
    McEstimate mc; // sampler mode
};

EventProbability event_probability(const WorldDistribution& dist, const Formula& phi,
                                   const Valuation& v);

} // namespace pla
