#pragma once

// Batched Monte Carlo estimators over Wilson's algorithm. Batch b draws from
// its own stream seeded with base_seed + b, and batch results are pooled in
// batch order, so estimates do not depend on how many threads ran them.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "forest.hpp"
#include "graph.hpp"
#include "rng.hpp"
#include "sampler.hpp"

namespace lep {

struct McConfig {
    std::uint64_t n_samples = 100000;
    std::uint64_t base_seed = 1;
    std::uint64_t batch_size = 10000;
    unsigned max_concurrency = 1;

    void validate() const {
        if (n_samples < 1) throw std::invalid_argument("McConfig: n_samples must be >= 1");
        if (batch_size < 1 || batch_size > n_samples)
            throw std::invalid_argument("McConfig: batch_size must lie in [1, n_samples]");
        if (max_concurrency < 1) throw std::invalid_argument("McConfig: max_concurrency must be >= 1");
    }

    std::uint64_t n_batches() const { return (n_samples + batch_size - 1) / batch_size; }
    std::uint64_t batch_count(std::uint64_t b) const { return std::min(batch_size, n_samples - b * batch_size); }
};

/// SplitMix64 finaliser; derives well-separated base seeds for independent
/// jobs (e.g. sweep points) from one user seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Runs fn(batch_index, seed, count) for every batch on up to
/// cfg.max_concurrency threads and returns results indexed by batch.
template <class Fn>
auto run_batches(const McConfig& cfg, Fn&& fn) {
    cfg.validate();
    using R = decltype(fn(std::uint64_t{}, std::uint64_t{}, std::uint64_t{}));
    const std::uint64_t nb = cfg.n_batches();
    std::vector<std::optional<R>> slots(nb);
    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(cfg.max_concurrency, nb));
    if (workers <= 1) {
        for (std::uint64_t b = 0; b < nb; ++b) slots[b].emplace(fn(b, cfg.base_seed + b, cfg.batch_count(b)));
    } else {
        std::atomic<std::uint64_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                try {
                    for (std::uint64_t b = next++; b < nb; b = next++)
                        slots[b].emplace(fn(b, cfg.base_seed + b, cfg.batch_count(b)));
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        if (error) std::rethrow_exception(error);
    }
    std::vector<R> out;
    out.reserve(nb);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::uint64_t n = 0;
};

/// Counts of a 0/1 functional; merging adds counts, so pooling is exact.
struct BernoulliCount {
    std::uint64_t hits = 0;
    std::uint64_t n = 0;

    BernoulliCount& operator+=(const BernoulliCount& o) {
        hits += o.hits;
        n += o.n;
        return *this;
    }
    bool operator==(const BernoulliCount&) const = default;

    McEstimate estimate() const {
        if (n == 0) return {};
        const double p = static_cast<double>(hits) / static_cast<double>(n);
        return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n};
    }
};

inline BernoulliCount pool(const std::vector<BernoulliCount>& parts) {
    BernoulliCount total;
    for (const auto& p : parts) total += p;
    return total;
}

enum class PotentialEstimator {
    Forest,         // full Wilson forest per replicate
    Decomposition,  // loop-erased path from x, then one killed walk from y
};

template <class Kernel>
BernoulliCount potential_batch(const Kernel& kernel, Vertex x, Vertex y, PotentialEstimator how, std::uint64_t seed,
                               std::uint64_t count) {
    const std::size_t n = kernel.n_vertices();
    Rng rng(seed);
    WalkWorkspace ws(n);
    const auto order = ascending_order(n);
    std::vector<char> frozen(n, 0);
    BernoulliCount c;
    for (std::uint64_t i = 0; i < count; ++i) {
        bool apart = false;
        if (how == PotentialEstimator::Forest) {
            const auto f = wilson_forest(kernel, rng, order, ws);
            apart = f.root_of(x) != f.root_of(y);
        } else {
            const LePath path = loop_erased_walk(kernel, x, frozen, rng, ws);
            for (Vertex v : path.vertices) frozen[v] = 1;
            apart = !frozen[y] && killed_before_hitting(kernel, y, frozen, rng);
            for (Vertex v : path.vertices) frozen[v] = 0;
        }
        c.hits += apart ? 1 : 0;
        ++c.n;
    }
    return c;
}

/// Monte Carlo estimate of U_q(x,y) with binomial standard error.
template <class Kernel>
McEstimate estimate_potential(const Kernel& kernel, Vertex x, Vertex y, const McConfig& cfg,
                              PotentialEstimator how = PotentialEstimator::Forest) {
    if (x == y) throw std::invalid_argument("estimate_potential: x and y must differ");
    if (x >= kernel.n_vertices() || y >= kernel.n_vertices())
        throw std::invalid_argument("estimate_potential: vertex out of range");
    const auto parts = run_batches(cfg, [&](std::uint64_t, std::uint64_t seed, std::uint64_t count) {
        return potential_batch(kernel, x, y, how, seed, count);
    });
    return pool(parts).estimate();
}

inline McEstimate estimate_potential(const WeightedGraph& g, double q, Vertex x, Vertex y, const McConfig& cfg,
                                     PotentialEstimator how = PotentialEstimator::Forest) {
    return estimate_potential(DenseWalkKernel(g, q), x, y, cfg, how);
}

inline McEstimate estimate_potential(const MeanFieldModel& m, double q, Vertex x, Vertex y, const McConfig& cfg,
                                     PotentialEstimator how = PotentialEstimator::Forest) {
    return estimate_potential(MeanFieldWalkKernel(m, q), x, y, cfg, how);
}

// ---------------------------------------------------------------------------
// Block statistics

/// Summary of one sampled partition. Sizes are sorted in decreasing order;
/// purity[i] is the majority-community fraction of block i (1 when there is a
/// single community).
struct BlockRecord {
    std::uint32_t n_blocks = 0;
    std::vector<std::uint32_t> sizes;
    std::vector<double> purity;

    std::uint32_t largest() const { return sizes.empty() ? 0 : sizes[0]; }
    std::uint32_t second() const { return sizes.size() < 2 ? 0 : sizes[1]; }
};

inline BlockRecord summarize_partition(const Partition& p, const std::vector<int>& community) {
    BlockRecord r;
    r.n_blocks = static_cast<std::uint32_t>(p.n_blocks());
    std::vector<std::pair<std::uint32_t, double>> rows;
    rows.reserve(p.n_blocks());
    for (const auto& block : p.blocks()) {
        std::size_t ones = 0;
        for (Vertex v : block) ones += community.empty() ? 0 : (community[v] == 1 ? 1 : 0);
        const double frac = static_cast<double>(std::max(ones, block.size() - ones)) / static_cast<double>(block.size());
        rows.emplace_back(static_cast<std::uint32_t>(block.size()), frac);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [s, f] : rows) {
        r.sizes.push_back(s);
        r.purity.push_back(f);
    }
    return r;
}

struct BlockStats {
    std::size_t n_vertices = 0;
    std::vector<BlockRecord> records;

    std::map<std::uint32_t, std::uint64_t> histogram() const {
        std::map<std::uint32_t, std::uint64_t> h;
        for (const auto& r : records) ++h[r.n_blocks];
        return h;
    }

    double mean_blocks() const {
        double s = 0.0;
        for (const auto& r : records) s += r.n_blocks;
        return records.empty() ? 0.0 : s / static_cast<double>(records.size());
    }

    double var_blocks() const {
        if (records.size() < 2) return 0.0;
        const double m = mean_blocks();
        double s = 0.0;
        for (const auto& r : records) s += (r.n_blocks - m) * (r.n_blocks - m);
        return s / static_cast<double>(records.size() - 1);
    }

    double stderr_blocks() const {
        return records.empty() ? 0.0 : std::sqrt(var_blocks() / static_cast<double>(records.size()));
    }
};

template <class Kernel>
BlockStats estimate_block_law(const Kernel& kernel, const std::vector<int>& community, const McConfig& cfg) {
    const std::size_t n = kernel.n_vertices();
    const auto parts = run_batches(cfg, [&](std::uint64_t, std::uint64_t seed, std::uint64_t count) {
        Rng rng(seed);
        WalkWorkspace ws(n);
        const auto order = ascending_order(n);
        std::vector<BlockRecord> out;
        out.reserve(count);
        for (std::uint64_t i = 0; i < count; ++i)
            out.push_back(summarize_partition(forest_to_partition(wilson_forest(kernel, rng, order, ws)), community));
        return out;
    });
    BlockStats stats;
    stats.n_vertices = n;
    for (const auto& p : parts) stats.records.insert(stats.records.end(), p.begin(), p.end());
    return stats;
}

inline BlockStats estimate_block_law(const MeanFieldModel& m, double q, const McConfig& cfg) {
    return estimate_block_law(MeanFieldWalkKernel(m, q), model_communities(m), cfg);
}

inline BlockStats estimate_block_law(const WeightedGraph& g, double q, const McConfig& cfg) {
    return estimate_block_law(DenseWalkKernel(g, q), {}, cfg);
}

/// Agreement of sampled block counts with the Bernoulli-sum law.
struct BlockLawFit {
    double expected_mean = 0.0;
    double expected_var = 0.0;
    double sample_mean = 0.0;
    double sample_var = 0.0;
    double mean_z = 0.0;       // (sample mean - expected) / stderr
    double var_ratio = 0.0;    // sample var / expected var
    double chi2 = 0.0;         // Pearson statistic over cells with expected count >= 5
    std::size_t chi2_dof = 0;
};

inline BlockLawFit compare_block_law(const BlockStats& s, const std::vector<double>& success_probs) {
    BlockLawFit f;
    const auto moments = bernoulli_sum_moments(success_probs);
    f.expected_mean = moments.mean;
    f.expected_var = moments.variance;
    f.sample_mean = s.mean_blocks();
    f.sample_var = s.var_blocks();
    const double se = std::sqrt(moments.variance / static_cast<double>(s.records.size()));
    f.mean_z = se > 0.0 ? (f.sample_mean - f.expected_mean) / se : 0.0;
    f.var_ratio = moments.variance > 0.0 ? f.sample_var / moments.variance : 1.0;
    const auto pmf = bernoulli_sum_pmf(success_probs);
    const auto hist = s.histogram();
    const double total = static_cast<double>(s.records.size());
    double pooled_expected = 0.0, pooled_observed = 0.0;
    std::size_t cells = 0;
    for (std::size_t m = 0; m < pmf.size(); ++m) {
        const double e = pmf[m] * total;
        const auto it = hist.find(static_cast<std::uint32_t>(m));
        const double o = it == hist.end() ? 0.0 : static_cast<double>(it->second);
        if (e >= 5.0) {
            f.chi2 += (o - e) * (o - e) / e;
            ++cells;
        } else {
            pooled_expected += e;
            pooled_observed += o;
        }
    }
    if (pooled_expected >= 5.0) {
        f.chi2 += (pooled_observed - pooled_expected) * (pooled_observed - pooled_expected) / pooled_expected;
        ++cells;
    }
    f.chi2_dof = cells > 0 ? cells - 1 : 0;
    return f;
}

/// Macroscopic structure of sampled partitions of K_{2N}(w1,w2).
struct CommunityReport {
    std::uint64_t samples = 0;
    double macro_fraction = 0.1;  // "macroscopic" means size > macro_fraction * 2N
    double giant_fraction = 0.9;  // "giant" means size >= giant_fraction * 2N
    double purity_threshold = 0.9;
    double freq_two_macroscopic = 0.0;  // exactly two macroscopic blocks
    double freq_no_macroscopic = 0.0;   // no block of size >= macro_fraction * 2N
    double freq_giant = 0.0;
    double freq_top_two_pure = 0.0;     // two largest blocks both reach purity_threshold
    double mean_purity_largest = 0.0;
    double mean_purity_second = 0.0;
    double mean_blocks = 0.0;
};

inline CommunityReport community_report(const BlockStats& s, double macro_fraction = 0.1, double giant_fraction = 0.9,
                                        double purity_threshold = 0.9) {
    CommunityReport r;
    r.samples = s.records.size();
    r.macro_fraction = macro_fraction;
    r.giant_fraction = giant_fraction;
    r.purity_threshold = purity_threshold;
    if (s.records.empty()) return r;
    const double total = static_cast<double>(s.n_vertices);
    std::uint64_t two = 0, none = 0, giant = 0, pure = 0;
    double p1 = 0.0, p2 = 0.0;
    for (const auto& rec : s.records) {
        std::size_t macro = 0;
        for (auto sz : rec.sizes) macro += sz > macro_fraction * total ? 1 : 0;
        two += macro == 2 ? 1 : 0;
        none += rec.largest() < macro_fraction * total ? 1 : 0;
        giant += rec.largest() >= giant_fraction * total ? 1 : 0;
        const double a = rec.purity.empty() ? 1.0 : rec.purity[0];
        const double b = rec.purity.size() < 2 ? 1.0 : rec.purity[1];
        pure += (a >= purity_threshold && b >= purity_threshold) ? 1 : 0;
        p1 += a;
        p2 += b;
    }
    const double n = static_cast<double>(s.records.size());
    r.freq_two_macroscopic = two / n;
    r.freq_no_macroscopic = none / n;
    r.freq_giant = giant / n;
    r.freq_top_two_pure = pure / n;
    r.mean_purity_largest = p1 / n;
    r.mean_purity_second = p2 / n;
    r.mean_blocks = s.mean_blocks();
    return r;
}

inline CommunityReport community_structure_report(const TwoCommunity& model, double q, const McConfig& cfg) {
    return community_report(estimate_block_law(MeanFieldModel{model}, q, cfg));
}

}  // namespace lep
