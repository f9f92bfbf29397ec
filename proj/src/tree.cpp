#include "pla/tree.hpp"
#include "pla/errors.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace pla {

void Tree::check(int v) const {
    if (v < 0 || v >= size()) fail(Errc::InvalidId, "node id " + std::to_string(v));
}

Tree Tree::from_parents(const std::vector<std::optional<int>>& parents) {
    const int n = static_cast<int>(parents.size());
    if (n == 0) fail(Errc::EmptyTree, "a tree has at least a root");
    Tree t;
    t.parent_.assign(n, -1);
    t.children_.assign(n, {});
    int root = -1;
    for (int v = 0; v < n; ++v) {
        if (!parents[v]) {
            if (root >= 0) fail(Errc::MultipleRoots, "nodes " + std::to_string(root) + " and " + std::to_string(v));
            root = v;
            continue;
        }
        int p = *parents[v];
        if (p < 0 || p >= n) fail(Errc::DanglingParent, "node " + std::to_string(v) + " -> " + std::to_string(p));
        if (p == v) fail(Errc::Cycle, "node " + std::to_string(v) + " is its own parent");
        t.parent_[v] = p;
        t.children_[p].push_back(v);
    }
    if (root < 0) fail(Errc::Cycle, "no root entry, parent pointers must cycle");
    t.root_ = root;

    t.level_.assign(n, -1);
    t.level_[root] = 0;
    std::vector<int> queue{root};
    size_t head = 0;
    while (head < queue.size()) {
        int v = queue[head++];
        for (int c : t.children_[v]) {
            t.level_[c] = t.level_[v] + 1;
            queue.push_back(c);
        }
    }
    if (static_cast<int>(queue.size()) != n) fail(Errc::Cycle, "parent pointers contain a cycle");

    t.height_ = 0;
    for (int v = 0; v < n; ++v) t.height_ = std::max(t.height_, t.level_[v]);
    t.by_level_.assign(t.height_ + 1, {});
    for (int v = 0; v < n; ++v) t.by_level_[t.level_[v]].push_back(v);
    return t;
}

Tree Tree::generate(const TreeGenConfig& cfg) {
    if (cfg.n < 1) fail(Errc::BadConfig, "n must be >= 1");
    if (cfg.delta < 1) fail(Errc::BadConfig, "delta must be >= 1");
    std::function<long long(int, long long, long long)> fanout;
    switch (cfg.profile) {
    case TreeGenConfig::Profile::Uniform:
        fanout = [&](int level, long long, long long n) {
            return level < cfg.delta ? n : 0;
        };
        break;
    case TreeGenConfig::Profile::Schedule:
        if (static_cast<int>(cfg.schedule.size()) != cfg.delta)
            fail(Errc::BadConfig, "schedule needs one child count per level 0..delta-1");
        fanout = [&](int level, long long, long long) {
            return level < cfg.delta ? cfg.schedule[level] : 0;
        };
        break;
    case TreeGenConfig::Profile::Custom:
        if (!cfg.custom) fail(Errc::BadConfig, "custom profile without a child-count function");
        fanout = cfg.custom;
        break;
    }

    std::vector<std::optional<int>> parents{std::nullopt};
    std::vector<int> frontier{0};
    for (int level = 0; level <= cfg.delta && !frontier.empty(); ++level) {
        std::vector<int> next;
        for (long long idx = 0; idx < static_cast<long long>(frontier.size()); ++idx) {
            long long k = fanout(level, idx, cfg.n);
            if (k < 0) fail(Errc::BadConfig, "negative child count");
            for (long long j = 0; j < k; ++j) {
                parents.push_back(frontier[idx]);
                next.push_back(static_cast<int>(parents.size()) - 1);
            }
        }
        frontier = std::move(next);
    }
    return from_parents(parents);
}

TreeGenConfig TreeGenConfig::uniform(int delta, long long n) {
    TreeGenConfig c;
    c.profile = Profile::Uniform;
    c.delta = delta;
    c.n = n;
    c.tag = AssumptionTag::Full;
    c.name = "uniform";
    return c;
}

TreeGenConfig TreeGenConfig::schedule_profile(std::vector<long long> counts) {
    TreeGenConfig c;
    c.profile = Profile::Schedule;
    c.delta = static_cast<int>(counts.size());
    c.n = counts.empty() ? 1 : counts[0];
    c.schedule = std::move(counts);
    c.tag = AssumptionTag::Light;
    c.name = "schedule";
    return c;
}

TreeGenConfig TreeGenConfig::mixed_leaves(long long n) {
    TreeGenConfig c;
    c.profile = Profile::Custom;
    c.delta = 2;
    c.n = n;
    c.tag = AssumptionTag::Violating;
    c.name = "mixedleaves";
    c.custom = [](int level, long long idx, long long n) -> long long {
        if (level == 0) return n;
        if (level >= 2) return 0;
        long long with_children = (n % 2 == 0) ? n / 2 : n / 3;
        return idx < with_children ? n : 0;
    };
    return c;
}

TreeGenConfig TreeGenConfig::few_big(long long n) {
    TreeGenConfig c;
    c.profile = Profile::Custom;
    c.delta = 2;
    c.n = n;
    c.tag = AssumptionTag::Violating;
    c.name = "fewbig";
    c.custom = [](int level, long long idx, long long n) -> long long {
        if (level == 0) return n;
        if (level >= 2) return 0;
        if (n % 2 == 1) return idx == 0 ? 2 * n * n * n : n;
        return idx < 2 ? n * n * n : n;
    };
    return c;
}

const std::vector<int>& Tree::nodes_at_level(int l) const {
    static const std::vector<int> empty;
    if (l < 0 || l > height_) return empty;
    return by_level_[l];
}

bool Tree::is_ancestor(int a, int b) const {
    check(a);
    check(b);
    if (level_[a] >= level_[b]) return false;
    int v = b;
    while (level_[v] > level_[a]) v = parent_[v];
    return v == a;
}

int Tree::ancestor_at_level(int v, int l) const {
    check(v);
    if (l < 0 || l > level_[v]) fail(Errc::InvalidId, "no ancestor at level " + std::to_string(l));
    while (level_[v] > l) v = parent_[v];
    return v;
}

std::vector<int> Tree::closure(const std::vector<int>& nodes) const {
    std::set<int> cl;
    cl.insert(root_);
    for (int v : nodes) {
        check(v);
        while (v != -1 && !cl.count(v)) {
            cl.insert(v);
            v = parent_[v];
        }
    }
    return std::vector<int>(cl.begin(), cl.end());
}

namespace {

// canonical serialization of the pattern subtree rooted at u
std::string pattern_key(const Tree& pat, int u) {
    std::vector<std::string> kids;
    for (int c : pat.children(u)) kids.push_back(pattern_key(pat, c));
    std::sort(kids.begin(), kids.end());
    std::string s = "(";
    for (auto& k : kids) s += k;
    s += ")";
    return s;
}

struct SubtreeCounter {
    const Tree& tree;
    const Tree& pat;
    std::map<std::pair<int, std::string>, long long> memo;

    long long count(int a, int u) {
        auto key = std::make_pair(a, pattern_key(pat, u));
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;

        long long result;
        const auto& pkids = pat.children(u);
        if (pkids.empty()) {
            result = 1; // the singleton subtree
        } else {
            // group pattern children by isomorphism class
            std::map<std::string, std::pair<int, int>> classes; // key -> (rep child, multiplicity)
            for (int c : pkids) {
                auto& e = classes[pattern_key(pat, c)];
                if (e.second == 0) e.first = c;
                e.second++;
            }
            std::vector<std::pair<int, int>> cls(classes.size());
            {
                size_t i = 0;
                for (auto& [k, v] : classes) cls[i++] = v;
            }
            // dp over tree children: state = how many of each class still to place
            std::vector<int> radix(cls.size());
            int states = 1;
            for (size_t j = 0; j < cls.size(); ++j) {
                radix[j] = cls[j].second + 1;
                states *= radix[j];
            }
            std::vector<long long> dp(states, 0);
            int full = 0;
            {
                int mul = 1;
                for (size_t j = 0; j < cls.size(); ++j) {
                    full += cls[j].second * mul;
                    mul *= radix[j];
                }
            }
            dp[full] = 1;
            for (int c : tree.children(a)) {
                std::vector<long long> nxt = dp;
                int mul = 1;
                for (size_t j = 0; j < cls.size(); ++j) {
                    long long ways = count(c, cls[j].first);
                    if (ways != 0) {
                        for (int s = 0; s < states; ++s) {
                            if (dp[s] == 0) continue;
                            int rem = (s / mul) % radix[j];
                            if (rem > 0) nxt[s - mul] += dp[s] * ways;
                        }
                    }
                    mul *= radix[j];
                }
                dp = std::move(nxt);
            }
            result = dp[0];
        }
        memo[key] = result;
        return result;
    }
};

} // namespace

long long Tree::count_rooted_subtrees(int a, const Tree& pattern) const {
    check(a);
    SubtreeCounter sc{*this, pattern, {}};
    return sc.count(a, pattern.root());
}

void Tree::save(std::ostream& out) const {
    out << "tree v1\n";
    out << "n=" << size() << "\n";
    for (int v = 0; v < size(); ++v) {
        out << v << " ";
        if (parent_[v] < 0)
            out << "-";
        else
            out << parent_[v];
        out << "\n";
    }
}

Tree Tree::load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "tree v1") fail(Errc::BadInput, "expected 'tree v1' header");
    if (!std::getline(in, line) || line.rfind("n=", 0) != 0) fail(Errc::BadInput, "expected 'n=<count>'");
    int n = 0;
    try {
        n = std::stoi(line.substr(2));
    } catch (...) {
        fail(Errc::BadInput, "bad node count");
    }
    std::vector<std::optional<int>> parents(n);
    std::vector<bool> seen(n, false);
    for (int i = 0; i < n; ++i) {
        if (!std::getline(in, line)) fail(Errc::BadInput, "truncated tree file");
        std::istringstream ls(line);
        int id;
        std::string p;
        if (!(ls >> id >> p)) fail(Errc::BadInput, "bad node line: " + line);
        if (id < 0 || id >= n) fail(Errc::BadInput, "node id out of range: " + line);
        if (seen[id]) fail(Errc::BadInput, "duplicate node id " + std::to_string(id));
        seen[id] = true;
        if (p == "-")
            parents[id] = std::nullopt;
        else {
            try {
                parents[id] = std::stoi(p);
            } catch (...) {
                fail(Errc::BadInput, "bad parent: " + line);
            }
        }
    }
    return from_parents(parents);
}

namespace {

std::map<std::string, std::string> parse_kv(const std::string& s) {
    std::map<std::string, std::string> kv;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) fail(Errc::BadConfig, "expected key=value in '" + item + "'");
        kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return kv;
}

long long ll_of(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) fail(Errc::BadConfig, "missing " + key + "=");
    try {
        return std::stoll(it->second);
    } catch (...) {
        fail(Errc::BadConfig, "bad number for " + key);
    }
}

} // namespace

TreeGenConfig tree_config_from_spec(const std::string& spec) {
    auto colon = spec.find(':');
    std::string kind = colon == std::string::npos ? spec : spec.substr(0, colon);
    std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "uniform") {
        auto kv = parse_kv(rest);
        return TreeGenConfig::uniform(static_cast<int>(ll_of(kv, "delta")), ll_of(kv, "n"));
    }
    if (kind == "mixedleaves") {
        auto kv = parse_kv(rest);
        return TreeGenConfig::mixed_leaves(ll_of(kv, "n"));
    }
    if (kind == "fewbig") {
        auto kv = parse_kv(rest);
        return TreeGenConfig::few_big(ll_of(kv, "n"));
    }
    if (kind == "schedule") {
        // schedule:counts=3;2;2
        auto kv = parse_kv(rest);
        auto it = kv.find("counts");
        if (it == kv.end()) fail(Errc::BadConfig, "schedule needs counts=");
        std::vector<long long> counts;
        std::istringstream cs(it->second);
        std::string c;
        while (std::getline(cs, c, ';')) counts.push_back(std::stoll(c));
        return TreeGenConfig::schedule_profile(counts);
    }
    fail(Errc::BadConfig, "unknown tree profile '" + kind + "'");
}

Tree tree_from_spec(const std::string& spec) {
    if (spec.rfind("file:", 0) == 0) {
        std::ifstream in(spec.substr(5));
        if (!in) fail(Errc::BadInput, "cannot open tree file " + spec.substr(5));
        return Tree::load(in);
    }
    return Tree::generate(tree_config_from_spec(spec));
}

} // namespace pla
