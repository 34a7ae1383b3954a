#pragma once

// Pairwise interaction potential U_q(x,y) = P(x and y in different blocks):
// closed forms for the complete graph and the two-community model, the
// Gaussian scaling limit, and brute-force oracles for small graphs.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "enumeration.hpp"
#include "forest.hpp"
#include "graph.hpp"

namespace lep {

enum class Method { Exact, MonteCarlo, Enumeration };

inline const char* to_string(Method m) {
    switch (m) {
        case Method::Exact: return "exact";
        case Method::MonteCarlo: return "monte-carlo";
        case Method::Enumeration: return "enumeration";
    }
    return "?";
}

struct PotentialResult {
    double value = 0.0;
    Method method = Method::Exact;
    std::optional<double> stderr_;  // present iff method == MonteCarlo
    // Truncation of the outer sum of the two-community formula.
    std::optional<std::size_t> n_max;
    std::optional<double> tail_mass;
};

enum class Star { In, Out };

inline const char* to_string(Star s) { return s == Star::In ? "in" : "out"; }

struct CompletePotentialParams {
    std::size_t n = 2;
    double w = 1.0;
    double q = 1.0;
};

struct TwoCommunityParams {
    std::size_t n = 1;  // per community
    double w1 = 1.0;
    double w2 = 1.0;
    double q = 1.0;
    Star star = Star::Out;
};

/// a (a-1) ... (a-count+1): exactly `count` factors, 1 when count == 0.
inline double falling_product(double a, std::size_t count) {
    double r = 1.0;
    for (std::size_t i = 0; i < count; ++i) r *= a - static_cast<double>(i);
    return r;
}

// ---------------------------------------------------------------------------
// Complete graph

inline PotentialResult u_complete_exact(const CompletePotentialParams& p) {
    if (p.n < 2) throw std::invalid_argument("u_complete_exact: need N >= 2");
    if (!(p.w > 0.0) || !(p.q > 0.0)) throw std::invalid_argument("u_complete_exact: w and q must be > 0");
    const double nn = static_cast<double>(p.n);
    const double total = p.q + nn * p.w;
    const double ratio = nn * p.w / total;
    long double term = p.q / total;  // h = 1
    long double sum = term;
    for (std::size_t h = 2; h <= p.n - 1; ++h) {
        term *= ratio * (1.0 - static_cast<double>(h) / nn);
        if (term == 0.0L) break;
        sum += term;
    }
    return {static_cast<double>(sum), Method::Exact, std::nullopt, std::nullopt, std::nullopt};
}

/// Mills ratio R(z) = P(Z > z) / phi(z) for z >= 0. Uses erfc for moderate z
/// and the Laplace continued fraction (modified Lentz) for z >= 5, where the
/// erfc route would multiply a tiny tail by a huge exponential.
inline double mills_ratio(double z) {
    if (z < 5.0) {
        return 0.5 * std::erfc(z / std::numbers::sqrt2) * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * z * z);
    }
    // R(z) = 1/(z + 1/(z + 2/(z + 3/(z + ...))))
    constexpr double tiny = 1e-300;
    double f = z, c = z, d = 0.0;
    for (int k = 1; k < 500; ++k) {
        d = z + k * d;
        if (d == 0.0) d = tiny;
        c = z + k / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 / f;
}

/// Large-N limit of the complete-graph potential at q = z w sqrt(N):
/// sqrt(2 pi) z e^{z^2/2} P(Z > z) = z R(z).
inline double u_complete_limit(double z) {
    if (!(z > 0.0)) throw std::invalid_argument("u_complete_limit: z must be > 0");
    return z * mills_ratio(z);
}

/// P(|Gamma| >= h) for the killed loop-erased walk on K_N.
inline double lerw_length_ccdf(std::size_t n, double w, double q, std::size_t h) {
    if (h == 0) throw std::invalid_argument("lerw_length_ccdf: h must be >= 1");
    if (n == 0 || !(w > 0.0) || !(q > 0.0)) throw std::invalid_argument("lerw_length_ccdf: invalid parameters");
    if (h > n) return 0.0;
    const double nn = static_cast<double>(n);
    const double stay = nn * w / (q + nn * w);
    double r = 1.0;
    for (std::size_t i = 1; i < h; ++i) r *= stay * (1.0 - static_cast<double>(i) / nn);
    return r;
}

// ---------------------------------------------------------------------------
// Two-community model

/// Distribution of the local time l(n) = #{s < n : X_s = 1} of the two-state
/// chain with stay probability p started in state 1. Rows are produced one n
/// at a time; row(n)[k-1] = P(l(n) = k) for k = 1..n.
class LocalTimeChain {
public:
    explicit LocalTimeChain(double p) : p_(p), in1_{0.0, 1.0}, in2_{0.0, 0.0} {
        if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("local time: p must lie in (0,1)");
        row_ = {1.0};
    }

    std::size_t n() const noexcept { return n_; }
    std::span<const double> row() const noexcept { return row_; }

    void advance() {
        // in1_[k] = P(X_{n-1} = 1, l(n) = k), in2_ likewise for state 2.
        std::vector<double> a(n_ + 2, 0.0), b(n_ + 2, 0.0);
        for (std::size_t k = 1; k <= n_; ++k) {
            a[k + 1] += p_ * in1_[k] + (1.0 - p_) * in2_[k];
            b[k] += (1.0 - p_) * in1_[k] + p_ * in2_[k];
        }
        in1_ = std::move(a);
        in2_ = std::move(b);
        ++n_;
        row_.assign(n_, 0.0);
        for (std::size_t k = 1; k <= n_; ++k) row_[k - 1] = in1_[k] + in2_[k];
    }

private:
    double p_;
    std::size_t n_ = 1;
    std::vector<double> in1_, in2_;
    std::vector<double> row_;
};

struct LocalTimeTable {
    double p = 0.5;
    std::vector<std::vector<double>> rows;  // rows[n-1][k-1] = P(l(n) = k)

    double prob(std::size_t n, std::size_t k) const {
        if (n == 0 || n > rows.size() || k == 0 || k > n) return 0.0;
        return rows[n - 1][k - 1];
    }
};

inline LocalTimeTable local_time_table(double p, std::size_t n_max) {
    if (n_max == 0) throw std::invalid_argument("local_time_table: n_max must be >= 1");
    LocalTimeTable t{p, {}};
    LocalTimeChain chain(p);
    t.rows.reserve(n_max);
    t.rows.emplace_back(chain.row().begin(), chain.row().end());
    while (chain.n() < n_max) {
        chain.advance();
        t.rows.emplace_back(chain.row().begin(), chain.row().end());
    }
    return t;
}

inline void check_lumped_args(std::size_t n, std::size_t k, std::size_t big_n) {
    if (k > n) throw std::invalid_argument("need 0 <= k <= n");
    if (k > big_n || n - k > big_n) throw std::invalid_argument("path does not fit in the communities");
}

/// Eigenvalues (lambda_1, lambda_2), both <= 0, of the 2x2 lumped generator
/// of K_{2N}(w1,w2) with k vertices removed from community 1 and n-k from
/// community 2 (rows constant on each remaining community). Sign convention:
/// theta uses (q - lambda_i).
inline std::pair<double, double> lumped_eigenvalues(std::size_t n, std::size_t k, std::size_t big_n, double w1,
                                                    double w2) {
    check_lumped_args(n, k, big_n);
    const double nn = static_cast<double>(big_n);
    const double k1 = static_cast<double>(k), k2 = static_cast<double>(n - k);
    // Lumped matrix of (L restricted): [[N w2 + k1 w1, -K2 w2], [-K1 w2, N w2 + k2 w1]]
    const double trace = static_cast<double>(n) * w1 + 2.0 * nn * w2;
    const double det = (w1 + w2) * (k1 * k2 * (w1 - w2) + nn * static_cast<double>(n) * w2);
    const double disc = w1 * w1 * (k1 - k2) * (k1 - k2) + 4.0 * (nn - k1) * (nn - k2) * w2 * w2;
    const double big = 0.5 * (trace + std::sqrt(disc));
    const double small = big > 0.0 ? det / big : 0.0;
    return {-small, -big};
}

/// Ratio det_{V minus gamma}(qI+L) (q+alpha)^n / det(qI+L) for a path with k
/// vertices in community 1 and n-k in community 2, alpha = N (w1 + w2).
inline double theta(std::size_t n, std::size_t k, std::size_t big_n, double w1, double w2, double q) {
    if (!(q > 0.0)) throw std::invalid_argument("theta: q must be > 0");
    const auto [l1, l2] = lumped_eigenvalues(n, k, big_n, w1, w2);
    const double nn = static_cast<double>(big_n);
    return (q - l1) * (q - l2) / (q * (q + 2.0 * nn * w2));
}

/// Probability that a walk from y is killed before hitting a path with k
/// vertices in community 1 (x's community) and n-k in community 2; y lies in
/// community 1 for Star::In and in community 2 for Star::Out.
inline double p_dagger(std::size_t n, std::size_t k, std::size_t big_n, double w1, double w2, double q, Star star) {
    check_lumped_args(n, k, big_n);
    if (!(q > 0.0)) throw std::invalid_argument("p_dagger: q must be > 0");
    const double nn = static_cast<double>(big_n);
    const double k1 = static_cast<double>(k), k2 = static_cast<double>(n - k);
    const double k_star = star == Star::Out ? k1 : k2;
    const double denom = (q + k1 * w1) * (q + k2 * w1) + nn * w2 * (2.0 * q + static_cast<double>(n) * w1) +
                         w2 * w2 * (nn * static_cast<double>(n) - k1 * k2);
    return q * (q + k_star * (w1 - w2) + 2.0 * nn * w2) / denom;
}

/// Number of paths from x with k vertices in community 1 (x included) and
/// n-k in community 2 that avoid y, divided by N^{n-1}.
inline double entropic_factor(std::size_t n, std::size_t k, std::size_t big_n, Star star) {
    if (k == 0 || k > n) return 0.0;
    const double nn = static_cast<double>(big_n);
    const double a = star == Star::In ? nn - 2.0 : nn - 1.0;
    const double b = star == Star::In ? nn : nn - 1.0;
    double r = 1.0;
    for (std::size_t i = 0; i + 1 < k; ++i) r *= (a - static_cast<double>(i)) / nn;
    for (std::size_t i = 0; i < n - k; ++i) r *= (b - static_cast<double>(i)) / nn;
    return std::max(r, 0.0);
}

inline constexpr double kDefaultTailTolerance = 1e-12;

inline void validate(const TwoCommunityParams& p) {
    if (p.n == 0) throw std::invalid_argument("two-community: N must be >= 1");
    if (!(p.w1 > 0.0) || !(p.w2 > 0.0) || !(p.q > 0.0))
        throw std::invalid_argument("two-community: w1, w2, q must be > 0");
    if (p.star == Star::In && p.n < 2)
        throw std::invalid_argument("two-community: the in-potential needs N >= 2 per community");
}

/// Double sum over the length n of the loop-erased path from x (geometric
/// law of T_q) and its local time k in x's community. The outer sum stops at
/// min(2N, first n whose geometric tail mass is below tail_tol).
inline PotentialResult u_two_community_exact(const TwoCommunityParams& p,
                                             double tail_tol = kDefaultTailTolerance) {
    validate(p);
    const std::size_t big_n = p.n;
    const double nn = static_cast<double>(big_n);
    const double alpha = nn * (p.w1 + p.w2);
    const double success = p.q / (p.q + alpha);
    const double fail = alpha / (p.q + alpha);

    std::size_t n_max = 2 * big_n;
    double tail = 0.0;
    if (fail > 0.0 && tail_tol > 0.0) {
        const double need = std::ceil(std::log(tail_tol) / std::log(fail));
        if (need < static_cast<double>(n_max)) n_max = static_cast<std::size_t>(std::max(1.0, need));
    }
    // Paths longer than 2N vertices do not exist, so stopping at 2N drops nothing.
    tail = n_max == 2 * big_n ? 0.0 : std::pow(fail, static_cast<double>(n_max));

    // Scaled falling products: sa[j] = prod_{i<j} (a-i)/N, sb likewise.
    const double a = p.star == Star::In ? nn - 2.0 : nn - 1.0;
    const double b = p.star == Star::In ? nn : nn - 1.0;
    std::vector<double> sa(n_max + 1, 0.0), sb(n_max + 1, 0.0);
    sa[0] = sb[0] = 1.0;
    for (std::size_t j = 1; j <= n_max; ++j) {
        sa[j] = std::max(0.0, sa[j - 1] * (a - static_cast<double>(j - 1)) / nn);
        sb[j] = std::max(0.0, sb[j - 1] * (b - static_cast<double>(j - 1)) / nn);
    }

    LocalTimeChain chain(p.w1 / (p.w1 + p.w2));
    long double sum = 0.0L;
    double geom = success;  // P(T_q = n)
    for (std::size_t n = 1; n <= n_max; ++n) {
        if (n > 1) {
            chain.advance();
            geom *= fail;
        }
        const auto row = chain.row();
        long double inner = 0.0L;
        const std::size_t k_lo = n > big_n ? n - big_n : 1;
        const std::size_t k_hi = std::min(n, big_n);
        for (std::size_t k = std::max<std::size_t>(k_lo, 1); k <= k_hi; ++k) {
            const double f = sa[k - 1] * sb[n - k];
            if (f == 0.0 || row[k - 1] == 0.0) continue;
            inner += static_cast<long double>(row[k - 1]) * f * theta(n, k, big_n, p.w1, p.w2, p.q) *
                     p_dagger(n, k, big_n, p.w1, p.w2, p.q, p.star);
        }
        sum += static_cast<long double>(geom) * inner;
    }
    PotentialResult r;
    r.value = std::clamp(static_cast<double>(sum), 0.0, 1.0);
    r.method = Method::Exact;
    r.n_max = n_max;
    r.tail_mass = tail;
    return r;
}

namespace detail {

// Compositions of k into r positive parts, C(k-1, r-1); the empty
// composition of 0 counts once.
inline double compositions(std::size_t k, std::size_t r) {
    if (r == 0) return k == 0 ? 1.0 : 0.0;
    if (k < r) return 0.0;
    double c = 1.0;
    const std::size_t top = k - 1, pick = std::min(r - 1, k - r);
    for (std::size_t i = 1; i <= pick; ++i) c = c * static_cast<double>(top - pick + i) / static_cast<double>(i);
    return std::round(c);
}

}  // namespace detail

/// Same potential evaluated path-by-path: sum over (k1, k2) of the number of
/// vertex choices, the sum over community-switch counts of the edge-weight
/// products, the determinant ratio written as a ratio of two quadratics in q,
/// and the absorption probability from an explicit 2x2 linear solve. Cost
/// O(N^3) and no overflow guard; meant for N up to about 60.
inline PotentialResult u_two_community_paths(const TwoCommunityParams& p) {
    validate(p);
    const std::size_t big_n = p.n;
    const double nn = static_cast<double>(big_n);
    const double alpha = nn * (p.w1 + p.w2);
    const bool in = p.star == Star::In;
    long double sum = 0.0L;
    for (std::size_t k1 = 1; k1 <= big_n; ++k1) {
        for (std::size_t k2 = 0; k2 <= big_n; ++k2) {
            const std::size_t n = k1 + k2;
            // Vertex choices, ordered: x first, y excluded.
            const double choices = in ? falling_product(nn - 2.0, k1 - 1) * falling_product(nn, k2)
                                      : falling_product(nn - 1.0, k1 - 1) * falling_product(nn - 1.0, k2);
            if (choices <= 0.0) continue;
            // Community sequences starting in 1; j1 switches 1->2, j2 switches 2->1.
            long double weights = 0.0L;
            for (std::size_t j1 = 0; j1 <= std::min(k1, k2); ++j1) {
                for (std::size_t j2 = j1 == 0 ? 0 : j1 - 1; j2 <= j1; ++j2) {
                    const std::size_t runs1 = j1 == j2 ? j1 + 1 : j1;
                    const std::size_t runs2 = j1;
                    const double c = detail::compositions(k1, runs1) * detail::compositions(k2, runs2);
                    if (c == 0.0) continue;
                    weights += c * std::pow(p.w1, static_cast<double>(n - 1 - j1 - j2)) *
                               std::pow(p.w2, static_cast<double>(j1 + j2));
                }
            }
            const double kk1 = static_cast<double>(k1), kk2 = static_cast<double>(k2);
            const double q = p.q;
            const double num = q * q + ((kk1 + kk2) * p.w1 + 2.0 * nn * p.w2) * q +
                               (p.w1 + p.w2) * ((kk1 + kk2) * nn * p.w2 + kk1 * kk2 * (p.w1 - p.w2));
            const double ratio = num / (q * q + 2.0 * nn * p.w2 * q) / std::pow(q + alpha, static_cast<double>(n));
            // Survival of y on the lumped chain {community 1 minus path,
            // community 2 minus path}: (q + alpha - w1) u_i = q + sum_j Q_ij u_j.
            const double d = q + alpha - p.w1;
            const double rest1 = nn - kk1, rest2 = nn - kk2;
            DenseMatrix m(2);
            m(0, 0) = d - (rest1 - 1.0) * p.w1;
            m(0, 1) = -rest2 * p.w2;
            m(1, 0) = -rest1 * p.w2;
            m(1, 1) = d - (rest2 - 1.0) * p.w1;
            const auto u = solve(m, {q, q});
            const double survive = in ? u[0] : u[1];
            sum += static_cast<long double>(choices) * weights * q * ratio * survive;
        }
    }
    PotentialResult r;
    r.value = static_cast<double>(sum);
    r.method = Method::Exact;
    return r;
}

// ---------------------------------------------------------------------------
// Arbitrary small graphs

inline void check_path(const WeightedGraph& g, std::span<const Vertex> path) {
    if (path.empty()) throw std::invalid_argument("path must be non-empty");
    std::vector<bool> seen(g.n_vertices(), false);
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (path[i] >= g.n_vertices()) throw std::invalid_argument("path vertex out of range");
        if (seen[path[i]]) throw std::invalid_argument("path is not self-avoiding");
        seen[path[i]] = true;
        if (i > 0 && g.weight(path[i - 1], path[i]) <= 0.0)
            throw std::invalid_argument("path uses a missing edge");
    }
}

/// Probability that the killed loop-erased walk from path[0] is exactly this
/// path, with the kill at its last vertex:
/// q prod w(x_{i-1}, x_i) det_{V minus path}(qI+L) / det(qI+L).
inline double marchal_le_prob(const WeightedGraph& g, double q, std::span<const Vertex> path) {
    if (!(q > 0.0)) throw std::invalid_argument("marchal_le_prob: q must be > 0");
    check_path(g, path);
    const auto l = build_laplacian(g);
    std::vector<bool> keep(g.n_vertices(), true);
    double w = q;
    for (std::size_t i = 0; i < path.size(); ++i) {
        keep[path[i]] = false;
        if (i > 0) w *= g.weight(path[i - 1], path[i]);
    }
    const double full = determinant(shifted_minor(l, q, std::vector<bool>(g.n_vertices(), true)));
    return w * determinant(shifted_minor(l, q, keep)) / full;
}

/// P_y(walk killed before hitting gamma): solves (qI + L') u = q 1 on the
/// complement of gamma.
inline double survival_prob(const WeightedGraph& g, double q, const std::vector<Vertex>& gamma, Vertex y) {
    if (!(q > 0.0)) throw std::invalid_argument("survival_prob: q must be > 0");
    if (y >= g.n_vertices()) throw std::invalid_argument("survival_prob: y out of range");
    std::vector<bool> keep(g.n_vertices(), true);
    for (Vertex v : gamma) {
        if (v == y) throw std::invalid_argument("survival_prob: y lies in gamma");
        keep.at(v) = false;
    }
    const auto l = build_laplacian(g);
    const auto m = shifted_minor(l, q, keep);
    std::size_t pos = 0;
    for (Vertex v = 0; v < y; ++v) pos += keep[v] ? 1 : 0;
    const auto u = solve(m, std::vector<double>(m.size(), q));
    return u[pos];
}

/// Calls visit(path) for every self-avoiding path from x along positive-weight
/// edges (all lengths >= 1).
template <class Visit>
void for_each_self_avoiding_path(const WeightedGraph& g, Vertex x, Visit&& visit) {
    std::vector<Vertex> path{x};
    std::vector<bool> on(g.n_vertices(), false);
    on[x] = true;
    auto rec = [&](auto&& self) -> void {
        visit(std::as_const(path));
        const Vertex last = path.back();
        for (Vertex y = 0; y < g.n_vertices(); ++y) {
            if (on[y] || g.weight(last, y) <= 0.0) continue;
            on[y] = true;
            path.push_back(y);
            self(self);
            path.pop_back();
            on[y] = false;
        }
    };
    rec(rec);
}

/// Memoised det of (qI+L) minors keyed by the removed-vertex bitmask.
class MinorCache {
public:
    MinorCache(const WeightedGraph& g, double q) : l_(build_laplacian(g)), q_(q) {}

    double det_without(std::uint32_t removed) {
        auto it = cache_.find(removed);
        if (it != cache_.end()) return it->second;
        std::vector<bool> keep(l_.size());
        for (std::size_t v = 0; v < l_.size(); ++v) keep[v] = !((removed >> v) & 1u);
        const double d = determinant(shifted_minor(l_, q_, keep));
        cache_.emplace(removed, d);
        return d;
    }

private:
    LaplacianMatrix l_;
    double q_;
    std::unordered_map<std::uint32_t, double> cache_;
};

struct EnumerationPotential {
    double by_forests = 0.0;  // direct sum over rooted forests
    double by_paths = 0.0;    // loop-erased path from x, then survival of y
};

inline EnumerationPotential u_enumeration_both(const WeightedGraph& g, double q, Vertex x, Vertex y) {
    const std::size_t n = g.n_vertices();
    if (n > kMaxEnumerationVertices) throw std::invalid_argument("u_enumeration: graph above the enumeration size guard");
    if (x >= n || y >= n) throw std::invalid_argument("u_enumeration: vertex out of range");
    if (x == y) throw std::invalid_argument("u_enumeration: needs two distinct vertices");
    if (!(q > 0.0)) throw std::invalid_argument("u_enumeration: q must be > 0");

    EnumerationPotential r;
    long double z = 0.0L, apart = 0.0L;
    for_each_rooted_forest(g, [&](const WeightedForest& f) {
        const long double mass = std::pow(q, static_cast<double>(f.trees)) * f.weight;
        z += mass;
        if (f.forest.root_of(x) != f.forest.root_of(y)) apart += mass;
    });
    r.by_forests = static_cast<double>(apart / z);

    MinorCache minors(g, q);
    const double full = minors.det_without(0);
    long double total = 0.0L;
    for_each_self_avoiding_path(g, x, [&](const std::vector<Vertex>& path) {
        std::uint32_t mask = 0;
        double w = q;
        bool hits_y = false;
        for (std::size_t i = 0; i < path.size(); ++i) {
            mask |= 1u << path[i];
            if (i > 0) w *= g.weight(path[i - 1], path[i]);
            hits_y = hits_y || path[i] == y;
        }
        if (hits_y) return;
        const double prob = w * minors.det_without(mask) / full;
        total += prob * survival_prob(g, q, path, y);
    });
    r.by_paths = static_cast<double>(total);
    return r;
}

/// Exhaustive potential on a small graph. Both the forest sum and the path
/// decomposition are evaluated; they must agree to 1e-9.
inline PotentialResult u_enumeration(const WeightedGraph& g, double q, Vertex x, Vertex y) {
    const auto both = u_enumeration_both(g, q, x, y);
    if (std::abs(both.by_forests - both.by_paths) > 1e-9)
        throw std::logic_error("u_enumeration: forest and path evaluations disagree");
    return {both.by_forests, Method::Enumeration, std::nullopt, std::nullopt, std::nullopt};
}

}  // namespace lep
