#pragma once

// Rooted spanning forests and the vertex partitions they induce.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "graph.hpp"

namespace lep {

inline constexpr Vertex kRoot = static_cast<Vertex>(-1);

/// Parent pointers; kRoot marks the root of each tree.
class RootedForest {
public:
    RootedForest() = default;
    explicit RootedForest(std::vector<Vertex> parent) : parent_(std::move(parent)) {}

    std::size_t n_vertices() const noexcept { return parent_.size(); }
    Vertex parent(Vertex v) const { return parent_[v]; }
    bool is_root(Vertex v) const { return parent_[v] == kRoot; }
    const std::vector<Vertex>& parents() const noexcept { return parent_; }

    std::size_t n_roots() const {
        return static_cast<std::size_t>(std::count(parent_.begin(), parent_.end(), kRoot));
    }

    /// Root of the tree containing v.
    Vertex root_of(Vertex v) const {
        std::size_t guard = 0;
        while (parent_[v] != kRoot) {
            v = parent_[v];
            if (++guard > parent_.size()) throw std::logic_error("forest contains a cycle");
        }
        return v;
    }

    /// Mixed-radix code of the parent array, used as a map key on small graphs.
    std::uint64_t code() const {
        std::uint64_t c = 0;
        const std::uint64_t radix = parent_.size() + 1;
        for (Vertex p : parent_) c = c * radix + (p == kRoot ? 0 : p + 1);
        return c;
    }

    bool operator==(const RootedForest&) const = default;

private:
    std::vector<Vertex> parent_;
};

/// Checks acyclicity and that every parent edge has positive weight.
inline bool is_valid_forest(const RootedForest& f, const WeightedGraph& g) {
    const std::size_t n = f.n_vertices();
    if (n != g.n_vertices()) return false;
    // 0 = unknown, 1 = on current chain, 2 = reaches a root
    std::vector<char> state(n, 0);
    for (Vertex v = 0; v < n; ++v) {
        std::vector<Vertex> chain;
        Vertex x = v;
        while (state[x] == 0) {
            state[x] = 1;
            chain.push_back(x);
            const Vertex p = f.parent(x);
            if (p == kRoot) break;
            if (p >= n || g.weight(x, p) <= 0.0) return false;
            x = p;
        }
        if (state[x] == 1 && f.parent(x) != kRoot) return false;
        for (Vertex c : chain) state[c] = 2;
    }
    return true;
}

/// Product of the weights of the parent edges.
inline double forest_weight(const RootedForest& f, const WeightedGraph& g) {
    double w = 1.0;
    for (Vertex v = 0; v < f.n_vertices(); ++v)
        if (!f.is_root(v)) w *= g.weight(v, f.parent(v));
    return w;
}

class Partition {
public:
    Partition() = default;

    /// Builds from per-vertex labels; blocks are renumbered in order of first
    /// appearance so equal partitions compare equal.
    explicit Partition(const std::vector<std::size_t>& labels) {
        std::vector<std::size_t> remap;
        std::vector<std::size_t> seen_label;
        block_id_.resize(labels.size());
        for (Vertex v = 0; v < labels.size(); ++v) {
            auto it = std::find(seen_label.begin(), seen_label.end(), labels[v]);
            std::size_t b;
            if (it == seen_label.end()) {
                b = seen_label.size();
                seen_label.push_back(labels[v]);
                blocks_.emplace_back();
            } else {
                b = static_cast<std::size_t>(it - seen_label.begin());
            }
            block_id_[v] = b;
            blocks_[b].push_back(v);
        }
    }

    std::size_t n_vertices() const noexcept { return block_id_.size(); }
    std::size_t n_blocks() const noexcept { return blocks_.size(); }
    std::size_t block_of(Vertex v) const { return block_id_[v]; }
    const std::vector<std::size_t>& block_ids() const noexcept { return block_id_; }
    const std::vector<std::vector<Vertex>>& blocks() const noexcept { return blocks_; }

    std::vector<std::size_t> block_sizes() const {
        std::vector<std::size_t> s;
        s.reserve(blocks_.size());
        for (const auto& b : blocks_) s.push_back(b.size());
        return s;
    }

    bool operator==(const Partition& o) const { return block_id_ == o.block_id_; }

private:
    std::vector<std::size_t> block_id_;
    std::vector<std::vector<Vertex>> blocks_;
};

/// Blocks are the trees of the forest.
inline Partition forest_to_partition(const RootedForest& f) {
    const std::size_t n = f.n_vertices();
    std::vector<std::size_t> root(n, kRoot);
    for (Vertex v = 0; v < n; ++v) {
        if (root[v] != kRoot) continue;
        std::vector<Vertex> chain;
        Vertex x = v;
        while (root[x] == kRoot && !f.is_root(x)) {
            chain.push_back(x);
            x = f.parent(x);
        }
        const Vertex r = root[x] != kRoot ? root[x] : x;
        root[x] = r;
        for (Vertex c : chain) root[c] = r;
    }
    return Partition(root);
}

// "v parent" lines, parent -1 for roots.
inline std::string write_forest(const RootedForest& f) {
    std::ostringstream os;
    for (Vertex v = 0; v < f.n_vertices(); ++v) {
        os << v << ' ';
        if (f.is_root(v)) os << -1;
        else os << f.parent(v);
        os << '\n';
    }
    return os.str();
}

inline RootedForest read_forest(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::pair<long long, long long>> rows;
    long long v = 0, p = 0;
    while (in >> v >> p) rows.emplace_back(v, p);
    std::vector<Vertex> parent(rows.size(), kRoot);
    std::vector<bool> seen(rows.size(), false);
    for (const auto& [x, px] : rows) {
        if (x < 0 || static_cast<std::size_t>(x) >= rows.size() || seen[x])
            throw std::runtime_error("forest text: bad or repeated vertex id");
        if (px < -1 || px >= static_cast<long long>(rows.size()))
            throw std::runtime_error("forest text: bad parent id");
        seen[x] = true;
        parent[x] = px == -1 ? kRoot : static_cast<Vertex>(px);
    }
    return RootedForest(std::move(parent));
}

// "v block_id" lines.
inline std::string write_partition(const Partition& p) {
    std::ostringstream os;
    for (Vertex v = 0; v < p.n_vertices(); ++v) os << v << ' ' << p.block_of(v) << '\n';
    return os.str();
}

}  // namespace lep
