#include "pla/structure.hpp"

#include <algorithm>

namespace pla {

SigmaStructure::SigmaStructure(TreePtr tree, Signature sig)
    : tree_(std::move(tree)), sig_(std::move(sig)) {
    unary_.resize(sig_.size());
    tuples_.resize(sig_.size());
    for (int r = 0; r < sig_.size(); ++r)
        if (sig_.arity(r) == 1) unary_[r].assign(tree_->size(), false);
}

void SigmaStructure::check(int rel, std::span<const int> tuple) const {
    if (rel < 0 || rel >= sig_.size()) fail(Errc::SignatureMismatch, "relation index out of range");
    if (static_cast<int>(tuple.size()) != sig_.arity(rel))
        fail(Errc::ArityMismatch, sig_.name(rel) + " expects " + std::to_string(sig_.arity(rel)) + " arguments");
    for (int v : tuple)
        if (v < 0 || v >= tree_->size()) fail(Errc::InvalidId, "node id " + std::to_string(v));
}

bool SigmaStructure::holds(int rel, std::span<const int> tuple) const {
    check(rel, tuple);
    if (sig_.arity(rel) == 1) return unary_[rel][tuple[0]];
    return tuples_[rel].count(std::vector<int>(tuple.begin(), tuple.end())) > 0;
}

void SigmaStructure::set(int rel, std::span<const int> tuple, bool value) {
    check(rel, tuple);
    if (sig_.arity(rel) == 1) {
        unary_[rel][tuple[0]] = value;
        return;
    }
    std::vector<int> t(tuple.begin(), tuple.end());
    if (value)
        tuples_[rel].insert(std::move(t));
    else
        tuples_[rel].erase(t);
}

void SigmaStructure::clear(int rel) {
    if (sig_.arity(rel) == 1)
        unary_[rel].assign(tree_->size(), false);
    else
        tuples_[rel].clear();
}

long long SigmaStructure::tuple_count(int rel) const {
    if (sig_.arity(rel) == 1) return std::count(unary_[rel].begin(), unary_[rel].end(), true);
    return static_cast<long long>(tuples_[rel].size());
}

SigmaStructure SigmaStructure::reduct(const Signature& sub) const {
    SigmaStructure out(tree_, sub);
    for (int r = 0; r < sub.size(); ++r) {
        int src = sig_.find(sub.name(r));
        if (src < 0 || sig_.arity(src) != sub.arity(r))
            fail(Errc::SignatureMismatch, "reduct symbol " + sub.name(r) + " not in structure");
        if (sub.arity(r) == 1)
            out.unary_[r] = unary_[src];
        else
            out.tuples_[r] = tuples_[src];
    }
    return out;
}

} // namespace pla
