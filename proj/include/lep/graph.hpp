#pragma once

// Weighted graphs, dense Laplacians, determinants and the analytic spectra of
// the two mean-field models (complete graph, two equal communities).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace lep {

using Vertex = std::size_t;

/// Row-major dense square matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t size() const noexcept { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<double> a_;
};

using LaplacianMatrix = DenseMatrix;

/// Simple undirected graph with nonnegative symmetric edge weights.
/// Absent edges have weight 0; there are no self-loops.
class WeightedGraph {
public:
    WeightedGraph() = default;
    explicit WeightedGraph(std::size_t n) : n_(n), w_(n * n, 0.0), degree_(n, 0.0) {
        if (n == 0) throw std::invalid_argument("graph needs at least one vertex");
    }

    std::size_t n_vertices() const noexcept { return n_; }

    double weight(Vertex x, Vertex y) const { return w_[x * n_ + y]; }

    /// Total jump rate W(x) = sum_z w(x,z).
    double degree(Vertex x) const { return degree_[x]; }

    void set_weight(Vertex x, Vertex y, double w) {
        if (x >= n_ || y >= n_) throw std::out_of_range("vertex id out of range");
        if (x == y) throw std::invalid_argument("self-loops are not allowed");
        if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("edge weights must be finite and >= 0");
        degree_[x] += w - w_[x * n_ + y];
        degree_[y] += w - w_[y * n_ + x];
        w_[x * n_ + y] = w;
        w_[y * n_ + x] = w;
    }

    /// Unordered pairs {x<y} with positive weight, in lexicographic order.
    std::vector<std::pair<Vertex, Vertex>> edges() const {
        std::vector<std::pair<Vertex, Vertex>> out;
        for (Vertex x = 0; x < n_; ++x)
            for (Vertex y = x + 1; y < n_; ++y)
                if (weight(x, y) > 0.0) out.emplace_back(x, y);
        return out;
    }

    bool operator==(const WeightedGraph&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<double> w_;
    std::vector<double> degree_;
};

/// Complete graph K_N, all off-diagonal weights equal to w.
struct Complete {
    std::size_t n = 0;
    double w = 1.0;
};

/// K_{2N}(w1, w2): vertices [0,N) and [N,2N) are the two communities,
/// weight w1 inside a community and w2 across.
struct TwoCommunity {
    std::size_t n = 0;  // per community
    double w1 = 1.0;
    double w2 = 1.0;

    /// w1 = 1, w2 = N^-beta.
    static TwoCommunity from_beta(std::size_t n, double beta) {
        return {n, 1.0, std::pow(static_cast<double>(n), -beta)};
    }
};

using MeanFieldModel = std::variant<Complete, TwoCommunity>;

inline void validate(const MeanFieldModel& m) {
    std::visit(
        [](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if (v.n == 0) throw std::invalid_argument("model size must be positive");
            if constexpr (std::is_same_v<T, Complete>) {
                if (!(v.w > 0.0)) throw std::invalid_argument("w must be > 0");
            } else {
                if (!(v.w1 > 0.0) || !(v.w2 > 0.0)) throw std::invalid_argument("w1, w2 must be > 0");
            }
        },
        m);
}

inline std::size_t model_vertices(const MeanFieldModel& m) {
    return std::visit(
        [](const auto& v) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, Complete>) return v.n;
            else return 2 * v.n;
        },
        m);
}

/// Community label per vertex (all zeros for the complete graph).
inline std::vector<int> model_communities(const MeanFieldModel& m) {
    std::vector<int> c(model_vertices(m), 0);
    if (const auto* tc = std::get_if<TwoCommunity>(&m))
        for (std::size_t v = tc->n; v < 2 * tc->n; ++v) c[v] = 1;
    return c;
}

inline WeightedGraph expand(const MeanFieldModel& m) {
    validate(m);
    WeightedGraph g(model_vertices(m));
    std::visit(
        [&g](const auto& v) {
            const std::size_t n = g.n_vertices();
            for (Vertex x = 0; x < n; ++x)
                for (Vertex y = x + 1; y < n; ++y) {
                    if constexpr (std::is_same_v<std::decay_t<decltype(v)>, Complete>) {
                        g.set_weight(x, y, v.w);
                    } else {
                        const bool same = (x < v.n) == (y < v.n);
                        g.set_weight(x, y, same ? v.w1 : v.w2);
                    }
                }
        },
        m);
    return g;
}

/// L = D - A as a dense matrix.
inline LaplacianMatrix build_laplacian(const WeightedGraph& g) {
    const std::size_t n = g.n_vertices();
    LaplacianMatrix l(n);
    for (Vertex x = 0; x < n; ++x) {
        for (Vertex y = 0; y < n; ++y)
            if (x != y) l(x, y) = -g.weight(x, y);
        l(x, x) = g.degree(x);
    }
    return l;
}

inline constexpr std::size_t kMaxDeterminantDim = 2048;

/// Determinant by LU factorisation with partial pivoting. The argument is
/// taken by value and overwritten by its factors.
inline double determinant(DenseMatrix a) {
    const std::size_t n = a.size();
    if (n > kMaxDeterminantDim) throw std::invalid_argument("determinant: dimension above guard");
    double det = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > best) {
                best = std::abs(a(i, k));
                piv = i;
            }
        if (best == 0.0) return 0.0;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            det = -det;
        }
        const double pivot = a(k, k);
        det *= pivot;
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) / pivot;
            if (f == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    return det;
}

/// Solves a x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve(DenseMatrix a, std::vector<double> b) {
    const std::size_t n = a.size();
    if (b.size() != n) throw std::invalid_argument("solve: size mismatch");
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (a(piv, k) == 0.0) throw std::runtime_error("solve: singular matrix");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
        x[i] = s / a(i, i);
    }
    return x;
}

/// Principal submatrix of (q I + L) on the vertices where keep[v] is true.
/// The diagonal keeps the full degree, so rates into removed vertices act
/// as killing.
inline DenseMatrix shifted_minor(const LaplacianMatrix& l, double q, const std::vector<bool>& keep) {
    std::vector<std::size_t> idx;
    for (std::size_t v = 0; v < l.size(); ++v)
        if (keep[v]) idx.push_back(v);
    DenseMatrix m(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = 0; j < idx.size(); ++j) m(i, j) = l(idx[i], idx[j]);
        m(i, i) += q;
    }
    return m;
}

/// Z(q) = det(q I + L), the weighted rooted-forest polynomial.
inline double forest_polynomial(const WeightedGraph& g, double q) {
    if (!(q > 0.0)) throw std::invalid_argument("forest_polynomial: q must be > 0");
    const auto l = build_laplacian(g);
    return determinant(shifted_minor(l, q, std::vector<bool>(l.size(), true)));
}

struct Eigenvalue {
    double value;
    std::size_t multiplicity;
    bool operator==(const Eigenvalue&) const = default;
};

using Spectrum = std::vector<Eigenvalue>;

/// Closed-form Laplacian spectrum of a mean-field model.
inline Spectrum mean_field_spectrum(const MeanFieldModel& m) {
    validate(m);
    if (const auto* c = std::get_if<Complete>(&m)) {
        Spectrum s{{0.0, 1}};
        if (c->n > 1) s.push_back({static_cast<double>(c->n) * c->w, c->n - 1});
        return s;
    }
    const auto& t = std::get<TwoCommunity>(m);
    const double n = static_cast<double>(t.n);
    Spectrum s{{0.0, 1}, {2.0 * n * t.w2, 1}};
    if (t.n > 1) s.push_back({n * (t.w1 + t.w2), 2 * t.n - 2});
    return s;
}

inline std::vector<double> flatten(const Spectrum& s) {
    std::vector<double> out;
    for (const auto& e : s) out.insert(out.end(), e.multiplicity, e.value);
    return out;
}

/// Success probabilities q/(q+lambda_i) of the independent Bernoulli
/// variables whose sum is the number of blocks.
inline std::vector<double> block_count_law(double q, const std::vector<double>& spectrum) {
    if (!(q > 0.0)) throw std::invalid_argument("block_count_law: q must be > 0");
    std::vector<double> p;
    p.reserve(spectrum.size());
    for (double lambda : spectrum) {
        if (lambda < 0.0) throw std::invalid_argument("block_count_law: negative eigenvalue");
        p.push_back(lambda == 0.0 ? 1.0 : q / (q + lambda));
    }
    return p;
}

/// Distribution of a sum of independent Bernoullis; entry m is P(sum = m).
inline std::vector<double> bernoulli_sum_pmf(const std::vector<double>& p) {
    std::vector<double> pmf{1.0};
    for (double pi : p) {
        std::vector<double> next(pmf.size() + 1, 0.0);
        for (std::size_t m = 0; m < pmf.size(); ++m) {
            next[m] += pmf[m] * (1.0 - pi);
            next[m + 1] += pmf[m] * pi;
        }
        pmf = std::move(next);
    }
    return pmf;
}

struct MomentPair {
    double mean = 0.0;
    double variance = 0.0;
};

inline MomentPair bernoulli_sum_moments(const std::vector<double>& p) {
    MomentPair m;
    for (double pi : p) {
        m.mean += pi;
        m.variance += pi * (1.0 - pi);
    }
    return m;
}

// Edge-list text format: "N M" then M lines "u v w", 0-based ids.

inline WeightedGraph read_graph(std::istream& in) {
    std::size_t n = 0, m = 0;
    if (!(in >> n >> m)) throw std::runtime_error("graph file: missing header \"N M\"");
    if (n == 0) throw std::runtime_error("graph file: N must be positive");
    WeightedGraph g(n);
    std::set<std::pair<Vertex, Vertex>> seen;
    for (std::size_t i = 0; i < m; ++i) {
        long long u = 0, v = 0;
        double w = 0.0;
        if (!(in >> u >> v >> w))
            throw std::runtime_error("graph file: expected " + std::to_string(m) + " edge lines, got " + std::to_string(i));
        if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n)
            throw std::runtime_error("graph file: vertex id out of range on edge " + std::to_string(i));
        if (u == v) throw std::runtime_error("graph file: self-loop on edge " + std::to_string(i));
        if (!(w >= 0.0) || !std::isfinite(w)) throw std::runtime_error("graph file: invalid weight on edge " + std::to_string(i));
        const std::pair<Vertex, Vertex> key{static_cast<Vertex>(std::min(u, v)), static_cast<Vertex>(std::max(u, v))};
        if (!seen.insert(key).second) throw std::runtime_error("graph file: duplicate pair on edge " + std::to_string(i));
        g.set_weight(key.first, key.second, w);
    }
    std::string extra;
    if (in >> extra) throw std::runtime_error("graph file: trailing content after edge list");
    return g;
}

inline WeightedGraph read_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open graph file: " + path);
    return read_graph(in);
}

inline std::string write_graph(const WeightedGraph& g) {
    const auto e = g.edges();
    std::ostringstream os;
    os.precision(17);
    os << g.n_vertices() << ' ' << e.size() << '\n';
    for (const auto& [x, y] : e) os << x << ' ' << y << ' ' << g.weight(x, y) << '\n';
    return os.str();
}

}  // namespace lep
