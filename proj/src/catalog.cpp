#include "pla/catalog.hpp"
#include "pla/errors.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>

namespace pla {

namespace {

// Skeleton enumeration: variable trees of height <= delta whose leaves can
// all carry outer marks. Shapes are built recursively as canonical nested
// multisets, then marked.
struct Shape {
    std::vector<Shape> kids;
    int leaves() const {
        if (kids.empty()) return 1;
        int s = 0;
        for (const auto& k : kids) s += k.leaves();
        return s;
    }
    int nodes() const {
        int s = 1;
        for (const auto& k : kids) s += k.nodes();
        return s;
    }
    std::string ser() const {
        std::string s = "(";
        for (const auto& k : kids) s += k.ser();
        return s + ")";
    }
};

void shapes_up_to(int height, int max_leaves, std::vector<Shape>& out) {
    out.push_back({}); // single node
    if (height == 0 || max_leaves < 1) return;
    std::vector<Shape> subs;
    shapes_up_to(height - 1, max_leaves, subs);
    std::sort(subs.begin(), subs.end(), [](const Shape& a, const Shape& b) { return a.ser() < b.ser(); });
    subs.erase(std::unique(subs.begin(), subs.end(),
                           [](const Shape& a, const Shape& b) { return a.ser() == b.ser(); }),
               subs.end());
    // choose a nonempty multiset of subtrees with leaf budget
    std::vector<Shape> chosen;
    std::function<void(size_t, int)> rec = [&](size_t from, int budget) {
        if (!chosen.empty()) {
            Shape s;
            s.kids = chosen;
            out.push_back(s);
        }
        for (size_t i = from; i < subs.size(); ++i) {
            int l = subs[i].leaves();
            if (l > budget) continue;
            chosen.push_back(subs[i]);
            rec(i, budget - l); // multiset: may repeat the same shape
            chosen.pop_back();
        }
    };
    rec(0, max_leaves);
}

void shape_to_parents(const Shape& s, int parent, std::vector<int>& out) {
    int me = static_cast<int>(out.size());
    out.push_back(parent);
    for (const auto& k : s.kids) shape_to_parents(k, me, out);
}

// every leaf must carry a mark; internal nodes optionally
void enumerate_markings(const std::vector<int>& parent, int k,
                        const std::function<void(const std::vector<int>&)>& yield) {
    int n = static_cast<int>(parent.size());
    std::vector<bool> is_leaf(n, true);
    for (int v = 0; v < n; ++v)
        if (parent[v] >= 0) is_leaf[parent[v]] = false;
    std::vector<int> mark(k, -1);       // outer index -> node
    std::vector<bool> taken(n, false);
    std::function<void(int)> rec = [&](int i) {
        if (i == k) {
            for (int v = 0; v < n; ++v)
                if (is_leaf[v] && !taken[v]) return;
            yield(mark);
            return;
        }
        for (int v = 0; v < n; ++v) {
            if (taken[v]) continue;
            taken[v] = true;
            mark[i] = v;
            rec(i + 1);
            taken[v] = false;
        }
    };
    rec(0);
}

std::mutex cache_mutex;
std::map<std::string, CatalogPtr> cache;

} // namespace

CatalogPtr enumerate_complete_closure_types(const Signature& sig, int num_outer, int delta,
                                            const CatalogOptions& opts) {
    std::string cache_key = sig.key() + "#" + std::to_string(num_outer) + "#" + std::to_string(delta);
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        auto it = cache.find(cache_key);
        if (it != cache.end()) return it->second;
    }
    if (num_outer < 0) fail(Errc::BadInput, "negative variable count");
    if (num_outer * delta + 1 > opts.var_cap)
        fail(Errc::TooManyVariables, "closure may need " + std::to_string(num_outer * delta + 1) +
                                         " variables, cap is " + std::to_string(opts.var_cap));

    std::map<std::string, ClosureType> found; // canonical key -> type

    auto add_literal_patterns = [&](int k, const std::vector<int>& parent) {
        int n = static_cast<int>(parent.size());
        // literal slots: every index tuple of every relation
        std::vector<std::pair<int, std::vector<int>>> slots;
        for (int r = 0; r < sig.size(); ++r) {
            std::vector<int> tuple(sig.arity(r), 0);
            while (true) {
                slots.emplace_back(r, tuple);
                int pos = sig.arity(r) - 1;
                while (pos >= 0 && tuple[pos] == n - 1) tuple[pos--] = 0;
                if (pos < 0) break;
                tuple[pos]++;
            }
        }
        if (static_cast<int>(slots.size()) > opts.bits_cap)
            fail(Errc::CatalogOverflow, std::to_string(slots.size()) + " literal slots, cap is " +
                                            std::to_string(opts.bits_cap));
        uint64_t total = 1ull << slots.size();
        for (uint64_t mask = 0; mask < total; ++mask) {
            std::vector<std::map<std::vector<int>, bool>> lits(sig.size());
            for (size_t i = 0; i < slots.size(); ++i)
                lits[slots[i].first][slots[i].second] = (mask >> i) & 1;
            ClosureType t = ClosureType::make(k, parent, sig, std::move(lits));
            found.emplace(t.key(), std::move(t));
        }
    };

    if (num_outer == 0) {
        add_literal_patterns(0, {-1});
    } else {
        std::vector<Shape> shapes;
        shapes_up_to(delta, num_outer, shapes);
        std::set<std::string> seen_shapes;
        for (const auto& s : shapes) {
            if (!seen_shapes.insert(s.ser()).second) continue;
            if (s.leaves() > num_outer) continue;
            if (s.nodes() > opts.var_cap) continue;
            std::vector<int> parent;
            shape_to_parents(s, -1, parent);
            enumerate_markings(parent, num_outer, [&](const std::vector<int>& mark) {
                // reorder: outer indices first, existentials after
                int n = static_cast<int>(parent.size());
                std::vector<int> remap(n, -1);
                for (int i = 0; i < num_outer; ++i) remap[mark[i]] = i;
                int next = num_outer;
                for (int v = 0; v < n; ++v)
                    if (remap[v] < 0) remap[v] = next++;
                std::vector<int> par2(n, -1);
                for (int v = 0; v < n; ++v)
                    if (parent[v] >= 0) par2[remap[v]] = remap[parent[v]];
                add_literal_patterns(num_outer, par2);
            });
        }
    }

    auto result = std::make_shared<Catalog>();
    result->reserve(found.size());
    for (auto& [k, t] : found) result->push_back(std::move(t));
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        cache.emplace(cache_key, result);
    }
    return result;
}

std::vector<const ClosureType*> complete_extensions(const ClosureType& base, const Catalog& catalog) {
    std::vector<const ClosureType*> out;
    for (const auto& t : catalog)
        if (extends(t, base)) out.push_back(&t);
    return out;
}

} // namespace pla
