#pragma once

// Verification suites: sampled forest laws against exhaustive enumeration,
// closed-form potentials against oracles and Monte Carlo, and the phase
// diagram trends. Shared by `lep verify` and the acceptance test binary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "enumeration.hpp"
#include "graph.hpp"
#include "montecarlo.hpp"
#include "phase.hpp"
#include "potentials.hpp"
#include "sampler.hpp"

namespace lep::verify {

struct Check {
    int criterion = 0;
    std::string name;
    double measured = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    std::string relation;  // how measured, expected and tolerance were compared
    bool passed = false;
};

struct Report {
    std::string suite;
    std::vector<Check> checks;

    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
    }

    void add(int criterion, std::string name, double measured, double expected, double tolerance,
             std::string relation, bool ok) {
        checks.push_back({criterion, std::move(name), measured, expected, tolerance, std::move(relation), ok});
    }

    /// |measured - expected| <= tol
    void near(int criterion, std::string name, double measured, double expected, double tol) {
        add(criterion, std::move(name), measured, expected, tol, "abs_diff<=tol",
            std::abs(measured - expected) <= tol);
    }

    /// |measured - expected| <= tol * |expected|
    void near_rel(int criterion, std::string name, double measured, double expected, double tol) {
        add(criterion, std::move(name), measured, expected, tol, "rel_diff<=tol",
            std::abs(measured - expected) <= tol * std::abs(expected));
    }

    void at_most(int criterion, std::string name, double measured, double bound) {
        add(criterion, std::move(name), measured, bound, 0.0, "measured<=expected", measured <= bound);
    }

    void at_least(int criterion, std::string name, double measured, double bound) {
        add(criterion, std::move(name), measured, bound, 0.0, "measured>=expected", measured >= bound);
    }

    void holds(int criterion, std::string name, bool ok) {
        add(criterion, std::move(name), ok ? 1.0 : 0.0, 1.0, 0.0, "condition", ok);
    }
};

struct NamedGraph {
    std::string name;
    WeightedGraph graph;
};

inline WeightedGraph path_graph(std::size_t n, double w = 1.0) {
    WeightedGraph g(n);
    for (Vertex v = 0; v + 1 < n; ++v) g.set_weight(v, v + 1, w);
    return g;
}

inline WeightedGraph star_graph(std::size_t n, double w = 1.0) {
    WeightedGraph g(n);
    for (Vertex v = 1; v < n; ++v) g.set_weight(0, v, w);
    return g;
}

/// The forest-law oracle graphs: K_3, K_4, path-4, star-4, K_4(1, 0.5).
inline std::vector<NamedGraph> oracle_graphs() {
    return {
        {"K3", expand(Complete{3, 1.0})},
        {"K4", expand(Complete{4, 1.0})},
        {"path4", path_graph(4)},
        {"star4", star_graph(4)},
        {"K4(1,0.5)", expand(TwoCommunity{2, 1.0, 0.5})},
    };
}

struct Options {
    std::uint64_t seed = 20240611;
    unsigned jobs = 1;
    std::vector<NamedGraph> graphs = oracle_graphs();
    // Multiplies the first edge weight seen by the sampler; the reference law
    // keeps the original graph. Used to check that the suite can fail.
    bool corrupt_weight = false;
};

inline McConfig mc_config(const Options& o, std::uint64_t samples, std::uint64_t stream,
                          std::uint64_t batch = 10000) {
    McConfig c;
    c.n_samples = samples;
    c.batch_size = std::min(batch, samples);
    c.base_seed = mix_seed(o.seed, stream);
    c.max_concurrency = o.jobs;
    return c;
}

/// Total-variation distance between sampled forest frequencies and the exact
/// law q^m w(F) / Z(q).
inline double forest_law_tv(const WeightedGraph& reference, const WeightedGraph& sampled, double q,
                            const McConfig& cfg) {
    const std::size_t n = reference.n_vertices();
    std::uint64_t cells = 1;
    for (std::size_t i = 0; i < n; ++i) cells *= n + 1;
    const DenseWalkKernel kernel(sampled, q);
    const auto parts = run_batches(cfg, [&](std::uint64_t, std::uint64_t seed, std::uint64_t count) {
        std::vector<std::uint64_t> hist(cells, 0);
        Rng rng(seed);
        WalkWorkspace ws(n);
        const auto order = ascending_order(n);
        for (std::uint64_t i = 0; i < count; ++i) ++hist[wilson_forest(kernel, rng, order, ws).code()];
        return hist;
    });
    std::vector<std::uint64_t> hist(cells, 0);
    for (const auto& p : parts)
        for (std::uint64_t c = 0; c < cells; ++c) hist[c] += p[c];
    std::vector<double> exact(cells, 0.0);
    const auto forests = enumerate_rooted_forests(reference);
    const double z = enumerated_forest_polynomial(forests, q);
    for (const auto& f : forests) exact[f.forest.code()] += std::pow(q, static_cast<double>(f.trees)) * f.weight / z;
    double tv = 0.0;
    const double total = static_cast<double>(cfg.n_samples);
    for (std::uint64_t c = 0; c < cells; ++c) tv += std::abs(static_cast<double>(hist[c]) / total - exact[c]);
    return 0.5 * tv;
}

/// P(Z > z) by composite Simpson quadrature of the normal density over
/// [z, z + 40]; independent of the Mills-ratio code path.
inline double normal_tail_quadrature(double z) {
    const int panels = 200000;
    const double a = z, b = z + 40.0, h = (b - a) / panels;
    auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
    double s = phi(a) + phi(b);
    for (int i = 1; i < panels; ++i) s += phi(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

inline std::string fmt(double v) { return format_double(v); }

// ---------------------------------------------------------------------------

inline Report verify_oracle(const Options& o) {
    Report r{"oracle", {}};
    const std::vector<double> qs{0.5, 1.0, 2.0};
    std::uint64_t stream = 100;
    for (const auto& ng : o.graphs) {
        const auto forests = enumerate_rooted_forests(ng.graph);
        WeightedGraph sampled = ng.graph;
        if (o.corrupt_weight) {
            const auto e = sampled.edges();
            if (!e.empty()) sampled.set_weight(e[0].first, e[0].second, 3.0 * sampled.weight(e[0].first, e[0].second));
        }
        for (double q : qs) {
            const std::string tag = ng.name + " q=" + fmt(q);
            r.near_rel(1, "Z(q) enumeration vs det(qI+L), " + tag, enumerated_forest_polynomial(forests, q),
                       forest_polynomial(ng.graph, q), 1e-9);
            const double tv = forest_law_tv(ng.graph, sampled, q, mc_config(o, 1000000, stream++, 50000));
            r.at_most(1, "forest law TV at 1e6 samples, " + tag, tv, 0.005);
        }
    }

    // Marchal normalisation and per-path frequencies on K_3.
    const auto k3 = expand(Complete{3, 1.0});
    for (double q : qs) {
        double total = 0.0;
        for_each_self_avoiding_path(k3, 0, [&](const std::vector<Vertex>& p) { total += marchal_le_prob(k3, q, p); });
        r.near(2, "sum of killed LE path probabilities on K3, q=" + fmt(q), total, 1.0, 1e-9);
    }
    {
        const double q = 1.0;
        const DenseWalkKernel kernel(k3, q);
        const auto cfg = mc_config(o, 1000000, 200, 50000);
        const auto parts = run_batches(cfg, [&](std::uint64_t, std::uint64_t seed, std::uint64_t count) {
            std::map<std::vector<Vertex>, std::uint64_t> tally;
            Rng rng(seed);
            WalkWorkspace ws(3);
            const std::vector<char> frozen(3, 0);
            for (std::uint64_t i = 0; i < count; ++i) ++tally[loop_erased_walk(kernel, 0, frozen, rng, ws).vertices];
            return tally;
        });
        std::map<std::vector<Vertex>, std::uint64_t> tally;
        for (const auto& p : parts)
            for (const auto& [k, v] : p) tally[k] += v;
        const double n = static_cast<double>(cfg.n_samples);
        for_each_self_avoiding_path(k3, 0, [&](const std::vector<Vertex>& p) {
            const double exact = marchal_le_prob(k3, q, p);
            const double freq = static_cast<double>(tally[p]) / n;
            std::string name = "LE path frequency on K3 q=1, path";
            for (Vertex v : p) name += " " + std::to_string(v);
            r.near(2, name + " (4 sigma)", freq, exact, 4.0 * std::sqrt(exact * (1.0 - exact) / n));
        });
    }

    // Exact block-count law on K_3 against enumeration.
    {
        const double q = 1.0;
        const auto forests = enumerate_rooted_forests(k3);
        const auto enumerated = enumerated_block_count_pmf(forests, 3, q);
        const auto bernoulli = bernoulli_sum_pmf(block_count_law(q, flatten(mean_field_spectrum(Complete{3, 1.0}))));
        for (std::size_t m = 1; m <= 3; ++m)
            r.near_rel(3, "P(|Pi|=" + std::to_string(m) + ") on K3 q=1, Bernoulli sum vs enumeration", bernoulli[m],
                       enumerated[m], 1e-9);
    }
    return r;
}

inline Report verify_formulas(const Options& o) {
    Report r{"formulas", {}};

    // Block-count means by Monte Carlo.
    {
        struct Case {
            std::string name;
            MeanFieldModel model;
            double q;
        };
        const std::vector<Case> cases{{"K50 q=5", Complete{50, 1.0}, 5.0},
                                      {"two-community N=50 w2=0.1 q=3", TwoCommunity{50, 1.0, 0.1}, 3.0}};
        std::uint64_t stream = 300;
        for (const auto& c : cases) {
            const auto probs = block_count_law(c.q, flatten(mean_field_spectrum(c.model)));
            const auto stats = estimate_block_law(c.model, c.q, mc_config(o, 100000, stream++));
            const auto fit = compare_block_law(stats, probs);
            const double se = std::sqrt(fit.expected_var / static_cast<double>(stats.records.size()));
            r.near(3, "mean |Pi_q| (3 sigma), " + c.name, fit.sample_mean, fit.expected_mean, 3.0 * se);
        }
    }

    // Complete-graph formula against enumeration and Monte Carlo.
    for (std::size_t n : {2, 3, 4})
        for (double q : {0.5, 1.0, 2.0}) {
            const auto g = expand(Complete{n, 1.0});
            r.near_rel(4, "u_complete_exact vs enumeration, N=" + std::to_string(n) + " q=" + fmt(q),
                       u_complete_exact({n, 1.0, q}).value, u_enumeration(g, q, 0, 1).value, 1e-9);
        }
    {
        std::uint64_t stream = 400;
        for (double q : {1.0, 5.0, std::sqrt(50.0)}) {
            const double exact = u_complete_exact({50, 1.0, q}).value;
            const auto est = estimate_potential(MeanFieldModel{Complete{50, 1.0}}, q, 0, 1, mc_config(o, 100000, stream++));
            r.near(4, "u_complete_exact vs Monte Carlo (3 stderr), K50 q=" + fmt(q), est.mean, exact, 3.0 * est.stderr_);
        }
    }

    // Gaussian scaling limit at z = 1.
    {
        const double z = 1.0;
        const double limit = std::sqrt(2.0 * std::numbers::pi) * z * std::exp(0.5 * z * z) * normal_tail_quadrature(z);
        r.near(5, "limit at z=1 by quadrature vs closed form", u_complete_limit(z), limit, 1e-10);
        r.near(5, "limit at z=1 vs 0.655680", limit, 0.655680, 5e-7);
        std::vector<double> err;
        for (std::size_t n : {100, 1000, 10000}) {
            const double u = u_complete_exact({n, 1.0, z * std::sqrt(static_cast<double>(n))}).value;
            err.push_back(std::abs(u - limit));
        }
        r.holds(5, "|U_N - limit| decreasing over N=1e2,1e3,1e4 (" + fmt(err[0]) + ", " + fmt(err[1]) + ", " +
                       fmt(err[2]) + ")",
                err[0] > err[1] && err[1] > err[2]);
        r.at_most(5, "|U_N - limit| at N=1e4", err[2], 0.02);
    }

    // Two-community formula.
    {
        struct Setting {
            double w1, w2, q;
        };
        for (const auto s : {Setting{1.0, 0.5, 1.0}, Setting{2.0, 0.3, 0.7}}) {
            const auto g = expand(TwoCommunity{2, s.w1, s.w2});
            for (Star star : {Star::In, Star::Out}) {
                const Vertex y = star == Star::In ? 1 : 2;
                r.near_rel(6,
                           std::string("u_two_community_exact vs enumeration, N=2 ") + to_string(star) +
                               " w1=" + fmt(s.w1) + " w2=" + fmt(s.w2) + " q=" + fmt(s.q),
                           u_two_community_exact({2, s.w1, s.w2, s.q, star}).value,
                           u_enumeration(g, s.q, 0, y).value, 1e-9);
            }
        }
        for (const auto s : {Setting{1.0, 1.0, 3.0}, Setting{0.7, 0.7, 1.5}})
            for (std::size_t n : {10, 25})
                for (Star star : {Star::In, Star::Out})
                    r.near_rel(6,
                               std::string("w1=w2 reduces to complete graph K_2N, N=") + std::to_string(n) + " " +
                                   to_string(star) + " w=" + fmt(s.w1) + " q=" + fmt(s.q),
                               u_two_community_exact({n, s.w1, s.w2, s.q, star}).value,
                               u_complete_exact({2 * n, s.w1, s.q}).value, 1e-8);
        std::uint64_t stream = 600;
        for (Star star : {Star::In, Star::Out}) {
            const double exact = u_two_community_exact({30, 1.0, 0.05, 3.0, star}).value;
            const auto est = estimate_potential(MeanFieldModel{TwoCommunity{30, 1.0, 0.05}}, 3.0, 0,
                                                star == Star::In ? 1 : 30, mc_config(o, 100000, stream++));
            r.near(6, std::string("u_two_community_exact vs Monte Carlo (3 stderr), N=30 ") + to_string(star), est.mean,
                   exact, 3.0 * est.stderr_);
        }
    }
    return r;
}

inline Report verify_phase(const Options& o) {
    Report r{"phase", {}};
    const std::vector<GridPoint> grid{
        {Rational(3, 10), Rational(9, 10)},  // b
        {Rational(1, 5), Rational(1, 5)},    // d
        {Rational(4, 5), Rational(1, 2)},    // f
        {Rational(1, 2), Rational(1, 5)},    // e
    };
    SweepOptions opt;
    opt.mc = mc_config(o, 10000, 700, 1000);
    const auto pts = sweep(grid, default_ladder(), opt);
    auto series = [](const PhasePoint& p, bool out) {
        std::vector<double> v;
        for (const auto& row : p.rows) v.push_back(out ? row.u_out : row.u_in);
        return v;
    };
    auto list = [](const std::vector<double>& v) {
        std::string s;
        for (double x : v) s += (s.empty() ? "" : ", ") + fmt(x);
        return s;
    };
    {
        const auto& b = pts[0];
        const auto out = series(b, true), in = series(b, false);
        r.holds(7, "regime b: u_out strictly increasing over N=100,400,1600 (" + list(out) + ")",
                out[0] < out[1] && out[1] < out[2]);
        r.at_least(7, "regime b: u_out(1600)", out[2], 0.9);
        r.holds(7, "regime b: u_in strictly decreasing over N=100,400,1600 (" + list(in) + ")",
                in[0] > in[1] && in[1] > in[2]);
        r.at_most(7, "regime b: u_in(1600)", in[2], 0.1);
    }
    {
        const auto& d = pts[1].rows.back();
        r.at_most(7, "regime d: u_in(1600)", d.u_in, 0.1);
        r.at_most(7, "regime d: u_out(1600)", d.u_out, 0.1);
        const auto& f = pts[2].rows.back();
        r.at_least(7, "regime f: u_in(1600)", f.u_in, 0.9);
        r.at_least(7, "regime f: u_out(1600)", f.u_out, 0.9);
        const auto& e = pts[3].rows.back();
        r.holds(7, "regime e: u_in(1600) in (0.1, 0.9), value " + fmt(e.u_in), e.u_in > 0.1 && e.u_in < 0.9);
        r.holds(7, "regime e: u_out(1600) in (0.1, 0.9), value " + fmt(e.u_out), e.u_out > 0.1 && e.u_out < 0.9);
        r.at_most(7, "regime e: |gap|(1600)", std::abs(e.gap()), 0.1);
    }

    // Macroscopic structure at N = 400 from 1e3 sampled partitions.
    {
        auto report = [&](double alpha, double beta, std::size_t n, std::uint64_t stream) {
            const auto model = TwoCommunity::from_beta(n, beta);
            return community_structure_report(model, std::pow(static_cast<double>(n), alpha),
                                              mc_config(o, 1000, stream, 100));
        };
        const auto d = report(0.2, 0.2, 400, 800);
        r.at_least(8, "regime d N=400: fraction of samples with a block >= 0.9*2N", d.freq_giant, 0.9);
        const auto f = report(0.8, 0.5, 400, 801);
        r.at_least(8, "regime f N=400: fraction of samples with no block >= 0.1*2N", f.freq_no_macroscopic, 0.9);
        const auto b = report(0.3, 0.9, 400, 802);
        r.at_least(8, "regime b N=400: fraction of samples whose two largest blocks have purity >= 0.9",
                   b.freq_top_two_pure, 0.8);
        const auto d100 = report(0.2, 0.2, 100, 803);
        const auto b100 = report(0.3, 0.9, 100, 804);
        auto scaled = [](const CommunityReport& c, double alpha, std::size_t n) {
            return c.mean_blocks / std::pow(static_cast<double>(n), std::min(alpha, 1.0));
        };
        for (const auto& [name, lo, hi] : {std::tuple{std::string("regime d"), scaled(d100, 0.2, 100), scaled(d, 0.2, 400)},
                                           std::tuple{std::string("regime b"), scaled(b100, 0.3, 100), scaled(b, 0.3, 400)}}) {
            const double ratio = std::max(lo, hi) / std::min(lo, hi);
            r.at_most(8, name + ": mean |Pi|/N^alpha ratio across N=100,400 (" + fmt(lo) + ", " + fmt(hi) + ")", ratio,
                      1.5);
        }
    }
    return r;
}

inline Report run_suite(const std::string& suite, const Options& o) {
    if (suite == "oracle") return verify_oracle(o);
    if (suite == "formulas") return verify_formulas(o);
    if (suite == "phase") return verify_phase(o);
    throw std::invalid_argument("unknown verification suite: " + suite);
}

}  // namespace lep::verify
