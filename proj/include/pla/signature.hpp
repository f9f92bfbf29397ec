#pragma once

#include "pla/errors.hpp"

#include <string>
#include <vector>

namespace pla {

struct RelSym {
    std::string name;
    int arity = 1;
    bool operator==(const RelSym&) const = default;
};

// A finite relational signature sigma containing the distinguished binary
// tree symbol E (tau = {E}) plus the listed non-tree relation symbols.
class Signature {
public:
    static constexpr const char* tree_symbol = "E";

    Signature() = default;
    explicit Signature(std::vector<RelSym> rels) {
        for (auto& r : rels) add(r.name, r.arity);
    }

    void add(const std::string& name, int arity) {
        if (arity < 1) fail(Errc::BadInput, "relation arity must be >= 1: " + name);
        if (name == tree_symbol) fail(Errc::BadInput, "E is reserved for the tree relation");
        if (find(name) >= 0) fail(Errc::BadInput, "duplicate relation name: " + name);
        rels_.push_back({name, arity});
    }

    int find(const std::string& name) const {
        for (size_t i = 0; i < rels_.size(); ++i)
            if (rels_[i].name == name) return static_cast<int>(i);
        return -1;
    }
    int arity(int rel) const { return rels_[rel].arity; }
    const std::string& name(int rel) const { return rels_[rel].name; }
    int size() const { return static_cast<int>(rels_.size()); }
    const std::vector<RelSym>& relations() const { return rels_; }

    // reduct to a subset of the non-tree symbols (E always kept)
    Signature restrict_to(const std::vector<std::string>& keep) const {
        Signature s;
        for (const auto& r : rels_)
            for (const auto& k : keep)
                if (r.name == k) s.rels_.push_back(r);
        return s;
    }

    bool contains(const Signature& sub) const {
        for (const auto& r : sub.rels_) {
            int i = find(r.name);
            if (i < 0 || rels_[i].arity != r.arity) return false;
        }
        return true;
    }

    bool operator==(const Signature&) const = default;

    std::string key() const {
        std::string k;
        for (const auto& r : rels_) k += r.name + "/" + std::to_string(r.arity) + ";";
        return k;
    }

private:
    std::vector<RelSym> rels_;
};

} // namespace pla
