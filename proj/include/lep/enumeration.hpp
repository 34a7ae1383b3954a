#pragma once

// Exhaustive enumeration of spanning rooted forests for small graphs.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "forest.hpp"
#include "graph.hpp"

namespace lep {

inline constexpr std::size_t kMaxEnumerationVertices = 12;

struct WeightedForest {
    RootedForest forest;
    double weight = 1.0;   // product of edge weights
    std::size_t trees = 0; // number of roots
};

namespace detail {

inline Vertex dsu_find(std::vector<Vertex>& p, Vertex x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
}

// Emits every rooted version of the unrooted forest given by `chosen`.
inline void emit_rootings(const WeightedGraph& g, const std::vector<std::pair<Vertex, Vertex>>& chosen, double weight,
                          const std::function<void(const WeightedForest&)>& visit) {
    const std::size_t n = g.n_vertices();
    std::vector<std::vector<Vertex>> adj(n);
    for (const auto& [x, y] : chosen) {
        adj[x].push_back(y);
        adj[y].push_back(x);
    }
    std::vector<std::vector<Vertex>> trees;
    std::vector<bool> seen(n, false);
    for (Vertex v = 0; v < n; ++v) {
        if (seen[v]) continue;
        trees.emplace_back();
        std::vector<Vertex> stack{v};
        seen[v] = true;
        while (!stack.empty()) {
            const Vertex x = stack.back();
            stack.pop_back();
            trees.back().push_back(x);
            for (Vertex y : adj[x])
                if (!seen[y]) {
                    seen[y] = true;
                    stack.push_back(y);
                }
        }
    }
    std::vector<std::size_t> choice(trees.size(), 0);
    std::vector<Vertex> parent(n, kRoot);
    while (true) {
        for (std::size_t t = 0; t < trees.size(); ++t) {
            const Vertex r = trees[t][choice[t]];
            parent[r] = kRoot;
            std::vector<Vertex> stack{r};
            std::vector<bool> done(n, false);
            done[r] = true;
            while (!stack.empty()) {
                const Vertex x = stack.back();
                stack.pop_back();
                for (Vertex y : adj[x])
                    if (!done[y]) {
                        done[y] = true;
                        parent[y] = x;
                        stack.push_back(y);
                    }
            }
        }
        visit(WeightedForest{RootedForest(parent), weight, trees.size()});
        std::size_t t = 0;
        while (t < trees.size() && ++choice[t] == trees[t].size()) choice[t++] = 0;
        if (t == trees.size()) break;
    }
}

}  // namespace detail

/// Calls `visit` once for every spanning rooted forest using edges of
/// positive weight. Forests are generated by include/exclude recursion over
/// the edge list with a union-find cycle check, then every choice of one root
/// per tree is emitted.
inline void for_each_rooted_forest(const WeightedGraph& g, const std::function<void(const WeightedForest&)>& visit) {
    if (g.n_vertices() > kMaxEnumerationVertices)
        throw std::invalid_argument("forest enumeration is limited to " + std::to_string(kMaxEnumerationVertices) +
                                    " vertices");
    const auto edges = g.edges();
    std::vector<std::pair<Vertex, Vertex>> chosen;
    std::function<void(std::size_t, std::vector<Vertex>, double)> rec = [&](std::size_t i, std::vector<Vertex> dsu,
                                                                              double weight) {
        if (i == edges.size()) {
            detail::emit_rootings(g, chosen, weight, visit);
            return;
        }
        rec(i + 1, dsu, weight);
        const auto [x, y] = edges[i];
        const Vertex rx = detail::dsu_find(dsu, x), ry = detail::dsu_find(dsu, y);
        if (rx != ry) {
            dsu[rx] = ry;
            chosen.push_back(edges[i]);
            rec(i + 1, std::move(dsu), weight * g.weight(x, y));
            chosen.pop_back();
        }
    };
    std::vector<Vertex> dsu(g.n_vertices());
    std::iota(dsu.begin(), dsu.end(), Vertex{0});
    rec(0, std::move(dsu), 1.0);
}

inline std::vector<WeightedForest> enumerate_rooted_forests(const WeightedGraph& g) {
    std::vector<WeightedForest> out;
    for_each_rooted_forest(g, [&out](const WeightedForest& f) { out.push_back(f); });
    return out;
}

/// sum_F q^{m(F)} w(F).
inline double enumerated_forest_polynomial(const std::vector<WeightedForest>& forests, double q) {
    double z = 0.0;
    for (const auto& f : forests) z += std::pow(q, static_cast<double>(f.trees)) * f.weight;
    return z;
}

/// P(|Pi_q| = m) under mu_q, from the enumerated forests.
inline std::vector<double> enumerated_block_count_pmf(const std::vector<WeightedForest>& forests, std::size_t n,
                                                      double q) {
    std::vector<double> pmf(n + 1, 0.0);
    for (const auto& f : forests) pmf[f.trees] += std::pow(q, static_cast<double>(f.trees)) * f.weight;
    const double z = enumerated_forest_polynomial(forests, q);
    for (double& p : pmf) p /= z;
    return pmf;
}

}  // namespace lep
