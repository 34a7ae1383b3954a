#pragma once

// Killed random walks, loop-erased walks and Wilson's algorithm with killing.
//
// The continuous-time walk killed at rate q is simulated through its embedded
// jump chain on V + {kill}: from x the walk is killed with probability
// q / (q + W(x)) and otherwise jumps to y with probability w(x,y) / (q + W(x)).
// Every functional used here (loop-erased paths, forests, hitting before
// killing) depends only on the jump chain.

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "forest.hpp"
#include "graph.hpp"
#include "rng.hpp"

namespace lep {

/// One step of the killed chain: nullopt means the walk was killed.
using Step = std::optional<Vertex>;

/// Generic kernel over a dense weighted graph: cumulative-sum inversion with
/// a single uniform per step.
class DenseWalkKernel {
public:
    DenseWalkKernel(const WeightedGraph& g, double q) : n_(g.n_vertices()), q_(q), cum_(n_ * n_), total_(n_) {
        if (!(q > 0.0)) throw std::invalid_argument("killing rate q must be > 0");
        for (Vertex x = 0; x < n_; ++x) {
            double s = 0.0;
            for (Vertex y = 0; y < n_; ++y) {
                s += g.weight(x, y);
                cum_[x * n_ + y] = s;
            }
            total_[x] = q + s;
        }
    }

    std::size_t n_vertices() const noexcept { return n_; }
    double q() const noexcept { return q_; }

    Step step(Vertex x, Rng& rng) const {
        const double u = rng.uniform() * total_[x];
        if (u < q_) return std::nullopt;
        const double r = u - q_;
        const double* row = cum_.data() + x * n_;
        const double* it = std::upper_bound(row, row + n_, r);
        if (it == row + n_) {
            // r landed on the rounding gap above the last cumulative value
            it = std::lower_bound(row, row + n_, row[n_ - 1]);
        }
        return static_cast<Vertex>(it - row);
    }

private:
    std::size_t n_;
    double q_;
    std::vector<double> cum_;
    std::vector<double> total_;
};

/// O(1) kernel for the mean-field models: choose kill / own community /
/// other community, then a uniform vertex within the chosen set.
class MeanFieldWalkKernel {
public:
    MeanFieldWalkKernel(const MeanFieldModel& m, double q) : q_(q) {
        validate(m);
        if (!(q > 0.0)) throw std::invalid_argument("killing rate q must be > 0");
        if (const auto* c = std::get_if<Complete>(&m)) {
            block_ = c->n;
            n_ = c->n;
            inside_ = static_cast<double>(c->n - 1) * c->w;
            across_ = 0.0;
        } else {
            const auto& t = std::get<TwoCommunity>(m);
            block_ = t.n;
            n_ = 2 * t.n;
            inside_ = static_cast<double>(t.n - 1) * t.w1;
            across_ = static_cast<double>(t.n) * t.w2;
        }
        total_ = q_ + inside_ + across_;
    }

    std::size_t n_vertices() const noexcept { return n_; }
    double q() const noexcept { return q_; }

    Step step(Vertex x, Rng& rng) const {
        const double u = rng.uniform() * total_;
        if (u < q_) return std::nullopt;
        const Vertex base = x < block_ ? 0 : block_;
        if (u < q_ + inside_ || across_ == 0.0) {
            const Vertex j = base + static_cast<Vertex>(rng.below(block_ - 1));
            return j < x ? j : j + 1;
        }
        const Vertex other = base == 0 ? block_ : 0;
        return other + static_cast<Vertex>(rng.below(block_));
    }

private:
    std::size_t n_ = 0;
    std::size_t block_ = 0;
    double q_;
    double inside_ = 0.0;
    double across_ = 0.0;
    double total_ = 0.0;
};

inline Step killed_step(const WeightedGraph& g, double q, Vertex x, Rng& rng) {
    if (x >= g.n_vertices()) throw std::out_of_range("killed_step: vertex out of range");
    return DenseWalkKernel(g, q).step(x, rng);
}

/// Self-avoiding path produced by a loop-erased walk. If `killed`, the last
/// vertex is where the walk was killed (a new root); otherwise the walk
/// stepped onto `hit`, a vertex of the frozen set.
struct LePath {
    std::vector<Vertex> vertices;
    bool killed = true;
    Vertex hit = kRoot;
};

/// Reusable per-sampler scratch space; position index of every vertex on the
/// current path, kRoot when absent.
class WalkWorkspace {
public:
    explicit WalkWorkspace(std::size_t n = 0) : pos_(n, kRoot) {}
    void resize(std::size_t n) { pos_.assign(n, kRoot); }
    std::vector<Vertex>& positions() { return pos_; }

private:
    std::vector<Vertex> pos_;
};

/// Runs the killed walk from `start`, erasing loops as soon as they close.
/// Stops when the walk is killed or steps onto a vertex with frozen[v] set.
template <class Kernel>
LePath loop_erased_walk(const Kernel& kernel, Vertex start, const std::vector<char>& frozen, Rng& rng,
                        WalkWorkspace& ws) {
    if (frozen[start]) throw std::invalid_argument("loop_erased_walk: start vertex is frozen");
    auto& pos = ws.positions();
    LePath path;
    auto& p = path.vertices;
    p.push_back(start);
    pos[start] = 0;
    while (true) {
        const Step s = kernel.step(p.back(), rng);
        if (!s) {
            path.killed = true;
            break;
        }
        const Vertex y = *s;
        if (frozen[y]) {
            path.killed = false;
            path.hit = y;
            break;
        }
        if (pos[y] != kRoot) {
            for (std::size_t i = pos[y] + 1; i < p.size(); ++i) pos[p[i]] = kRoot;
            p.resize(pos[y] + 1);
        } else {
            pos[y] = p.size();
            p.push_back(y);
        }
#ifndef NDEBUG
        for (std::size_t i = 0; i < p.size(); ++i) assert(pos[p[i]] == i);
#endif
    }
    for (Vertex v : p) pos[v] = kRoot;
    return path;
}

template <class Kernel>
LePath loop_erased_walk(const Kernel& kernel, Vertex start, const std::vector<char>& frozen, Rng& rng) {
    WalkWorkspace ws(kernel.n_vertices());
    return loop_erased_walk(kernel, start, frozen, rng, ws);
}

inline std::vector<Vertex> ascending_order(std::size_t n) {
    std::vector<Vertex> order(n);
    std::iota(order.begin(), order.end(), Vertex{0});
    return order;
}

/// Wilson's algorithm with killing: scan vertices in `scan_order`, run a
/// loop-erased walk from each vertex not yet in the forest, and graft the
/// path. Killed paths become new trees rooted at their last vertex.
template <class Kernel>
RootedForest wilson_forest(const Kernel& kernel, Rng& rng, const std::vector<Vertex>& scan_order, WalkWorkspace& ws) {
    const std::size_t n = kernel.n_vertices();
    if (scan_order.size() != n) throw std::invalid_argument("wilson_forest: scan order must list every vertex");
    std::vector<char> in_forest(n, 0);
    std::vector<Vertex> parent(n, kRoot);
    for (Vertex start : scan_order) {
        if (in_forest[start]) continue;
        const LePath path = loop_erased_walk(kernel, start, in_forest, rng, ws);
        const auto& p = path.vertices;
        for (std::size_t i = 0; i + 1 < p.size(); ++i) parent[p[i]] = p[i + 1];
        parent[p.back()] = path.killed ? kRoot : path.hit;
        for (Vertex v : p) in_forest[v] = 1;
    }
    return RootedForest(std::move(parent));
}

template <class Kernel>
RootedForest wilson_forest(const Kernel& kernel, Rng& rng, const std::vector<Vertex>& scan_order) {
    WalkWorkspace ws(kernel.n_vertices());
    return wilson_forest(kernel, rng, scan_order, ws);
}

inline RootedForest wilson_forest(const WeightedGraph& g, double q, std::uint64_t seed,
                                  const std::vector<Vertex>& scan_order) {
    Rng rng(seed);
    return wilson_forest(DenseWalkKernel(g, q), rng, scan_order);
}

inline RootedForest wilson_forest(const WeightedGraph& g, double q, std::uint64_t seed) {
    return wilson_forest(g, q, seed, ascending_order(g.n_vertices()));
}

/// Plain killed walk from y: true if killed before stepping onto a frozen
/// vertex. Returns true immediately when nothing is frozen.
template <class Kernel>
bool killed_before_hitting(const Kernel& kernel, Vertex y, const std::vector<char>& frozen, Rng& rng) {
    if (frozen[y]) return false;
    Vertex x = y;
    while (true) {
        const Step s = kernel.step(x, rng);
        if (!s) return true;
        if (frozen[*s]) return false;
        x = *s;
    }
}

/// Owns a kernel, an RNG stream and scratch space; one per thread.
template <class Kernel>
class ForestSampler {
public:
    ForestSampler(Kernel kernel, std::uint64_t seed)
        : kernel_(std::move(kernel)), rng_(seed), ws_(kernel_.n_vertices()), order_(ascending_order(kernel_.n_vertices())) {}

    void set_scan_order(std::vector<Vertex> order) {
        if (order.size() != kernel_.n_vertices()) throw std::invalid_argument("scan order size mismatch");
        order_ = std::move(order);
    }

    RootedForest sample() { return wilson_forest(kernel_, rng_, order_, ws_); }

    LePath walk(Vertex start, const std::vector<char>& frozen) {
        return loop_erased_walk(kernel_, start, frozen, rng_, ws_);
    }

    const Kernel& kernel() const noexcept { return kernel_; }
    Rng& rng() noexcept { return rng_; }

private:
    Kernel kernel_;
    Rng rng_;
    WalkWorkspace ws_;
    std::vector<Vertex> order_;
};

}  // namespace lep
