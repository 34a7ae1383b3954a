#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "lep/potentials.hpp"

using namespace lep;

namespace {

double normal_tail_simpson(double z) {
    const int panels = 400000;
    const double h = 40.0 / panels;
    auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
    double s = phi(z) + phi(z + 40.0);
    for (int i = 1; i < panels; ++i) s += phi(z + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// Path with k vertices in community 1 (starting at 0) and n-k in community 2.
std::vector<Vertex> lumped_path(std::size_t n, std::size_t k, std::size_t big_n) {
    std::vector<Vertex> p;
    for (std::size_t i = 0; i < k; ++i) p.push_back(i);
    for (std::size_t i = 0; i < n - k; ++i) p.push_back(big_n + i);
    return p;
}

double determinant_ratio(const WeightedGraph& g, double q, const std::vector<Vertex>& removed) {
    const auto l = build_laplacian(g);
    std::vector<bool> keep(g.n_vertices(), true);
    for (Vertex v : removed) keep[v] = false;
    return determinant(shifted_minor(l, q, keep)) / determinant(shifted_minor(l, q, std::vector<bool>(keep.size(), true)));
}

// Killed-before-absorbed probability on the two transient classes
// {community 1 minus path, community 2 minus path}: u = (I - Q)^{-1} D^{-1} (q, q).
Eigen::Vector2d absorption(std::size_t k1, std::size_t k2, std::size_t big_n, double w1, double w2, double q) {
    const double nn = static_cast<double>(big_n);
    const double r1 = nn - k1, r2 = nn - k2;
    const double d = q + nn * (w1 + w2) - w1;
    Eigen::Matrix2d qm;
    qm << (r1 - 1) * w1 / d, r2 * w2 / d, r1 * w2 / d, (r2 - 1) * w1 / d;
    return (Eigen::Matrix2d::Identity() - qm).inverse() * Eigen::Vector2d(q / d, q / d);
}

}  // namespace

// --- complete graph -------------------------------------------------------

TEST(CompleteExact, Examples) {
    EXPECT_DOUBLE_EQ(u_complete_exact({2, 1.0, 2.0}).value, 0.5);
    EXPECT_NEAR(u_complete_exact({3, 1.0, 1.0}).value, 0.3125, 1e-15);
    const auto r = u_complete_exact({10, 1.0, 1.0});
    EXPECT_EQ(r.method, Method::Exact);
    EXPECT_FALSE(r.stderr_.has_value());
    EXPECT_THROW(u_complete_exact({1, 1.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(u_complete_exact({5, 0.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(u_complete_exact({5, 1.0, -1.0}), std::invalid_argument);
}

TEST(CompleteExact, MatchesEnumeration) {
    for (std::size_t n : {2, 3, 4, 5})
        for (double q : {0.3, 1.0, 4.0}) {
            const double w = 0.7;
            EXPECT_NEAR(u_complete_exact({n, w, q}).value, u_enumeration(expand(Complete{n, w}), q, 0, 1).value, 1e-9);
        }
}

TEST(CompleteExact, MonotoneInQAndInUnitInterval) {
    for (std::size_t n : {5, 20}) {
        double prev = 0.0;
        for (int i = 0; i < 20; ++i) {
            const double q = 0.05 * std::pow(1.5, i);
            const double u = u_complete_exact({n, 1.0, q}).value;
            EXPECT_GT(u, 0.0);
            EXPECT_LT(u, 1.0);
            EXPECT_GE(u, prev - 1e-9);
            prev = u;
        }
    }
}

TEST(CompleteExact, LargeNStaysFinite) {
    const double u = u_complete_exact({1000000, 1.0, 1000.0}).value;
    EXPECT_TRUE(std::isfinite(u));
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
}

TEST(CompleteLimit, AgainstQuadrature) {
    EXPECT_NEAR(u_complete_limit(1.0), 0.655680, 5e-7);
    for (double z : {0.1, 0.5, 1.0, 2.0, 3.0, 4.9, 5.1, 7.0})
        EXPECT_NEAR(u_complete_limit(z),
                    std::sqrt(2.0 * std::numbers::pi) * z * std::exp(0.5 * z * z) * normal_tail_simpson(z),
                    1e-10 * u_complete_limit(z))
            << z;
}

TEST(CompleteLimit, Shape) {
    EXPECT_LT(u_complete_limit(1e-6), 1e-5);
    double prev = 0.0;
    for (double z : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0}) {
        const double u = u_complete_limit(z);
        EXPECT_GT(u, prev);
        prev = u;
    }
    for (double z : {5.0, 10.0, 20.0}) {
        EXPECT_GT(u_complete_limit(z), 0.96);
        EXPECT_LT(u_complete_limit(z), 1.0);
    }
    // Asymptotic series z R(z) ~ sum_j (-1)^j (2j-1)!! z^-2j, truncated after j=7.
    const double z = 30.0, z2 = z * z;
    double series = 0.0, term = 1.0;
    for (int j = 0; j <= 7; ++j) {
        series += term;
        term *= -(2.0 * j + 1.0) / z2;
    }
    EXPECT_NEAR(u_complete_limit(z), series, 1e-12);
    EXPECT_THROW(u_complete_limit(0.0), std::invalid_argument);
}

TEST(CompleteLimit, ConvergenceOfExactFormula) {
    double prev = 1.0;
    for (std::size_t n : {100, 1000, 10000, 100000}) {
        const double err = std::abs(u_complete_exact({n, 1.0, std::sqrt(static_cast<double>(n))}).value -
                                    u_complete_limit(1.0));
        EXPECT_LT(err, prev);
        prev = err;
    }
}

TEST(LerwLength, Examples) {
    EXPECT_DOUBLE_EQ(lerw_length_ccdf(7, 1.0, 2.0, 1), 1.0);
    EXPECT_DOUBLE_EQ(lerw_length_ccdf(3, 1.0, 1.0, 2), 0.5);
    EXPECT_DOUBLE_EQ(lerw_length_ccdf(3, 1.0, 1.0, 4), 0.0);
    EXPECT_THROW(lerw_length_ccdf(3, 1.0, 1.0, 0), std::invalid_argument);
    double prev = 1.0;
    for (std::size_t h = 1; h <= 12; ++h) {
        const double v = lerw_length_ccdf(12, 0.5, 1.5, h);
        EXPECT_LE(v, prev);
        prev = v;
    }
}

TEST(LerwLength, PotentialIsKillAtEachLength) {
    // U = sum_h P(|Gamma| = h) P(y off the path | h) q/(q + h w); the h-1 vertices after x are uniform.
    const std::size_t n = 9;
    const double w = 0.8, q = 1.7;
    double u = 0.0;
    for (std::size_t h = 1; h < n; ++h)
        u += (lerw_length_ccdf(n, w, q, h) - lerw_length_ccdf(n, w, q, h + 1)) * (n - h) / (n - 1.0) * q / (q + h * w);
    EXPECT_NEAR(u, u_complete_exact({n, w, q}).value, 1e-12);
}

// --- two-community building blocks ----------------------------------------

TEST(LocalTime, SmallRows) {
    const double p = 0.3;
    const auto t = local_time_table(p, 3);
    EXPECT_DOUBLE_EQ(t.prob(1, 1), 1.0);
    EXPECT_DOUBLE_EQ(t.prob(2, 2), p);
    EXPECT_DOUBLE_EQ(t.prob(2, 1), 1.0 - p);
    EXPECT_NEAR(t.prob(3, 2), p * (1 - p) + (1 - p) * (1 - p), 1e-15);
    EXPECT_NEAR(t.prob(3, 2), 1.0 - p, 1e-15);
    EXPECT_DOUBLE_EQ(t.prob(3, 0), 0.0);
    EXPECT_DOUBLE_EQ(t.prob(3, 4), 0.0);
    EXPECT_THROW(local_time_table(0.0, 3), std::invalid_argument);
    EXPECT_THROW(local_time_table(0.5, 0), std::invalid_argument);
}

TEST(LocalTime, MatchesPathEnumeration) {
    for (double p : {0.2, 0.5, 0.85}) {
        const std::size_t n_max = 8;
        const auto t = local_time_table(p, n_max);
        for (std::size_t n = 1; n <= n_max; ++n) {
            std::vector<double> dist(n + 1, 0.0);
            // states of X_1..X_{n-1} as bits; X_0 = 1
            for (std::uint32_t bits = 0; bits < (1u << (n - 1)); ++bits) {
                int state = 1, ones = 1;
                double prob = 1.0;
                for (std::size_t s = 0; s + 1 < n; ++s) {
                    const int next = (bits >> s) & 1u ? 1 : 2;
                    prob *= next == state ? p : 1.0 - p;
                    ones += next == 1;
                    state = next;
                }
                dist[ones] += prob;
            }
            double row_sum = 0.0;
            for (std::size_t k = 1; k <= n; ++k) {
                EXPECT_NEAR(t.prob(n, k), dist[k], 1e-14) << "n=" << n << " k=" << k;
                row_sum += t.prob(n, k);
            }
            EXPECT_NEAR(row_sum, 1.0, 1e-12);
        }
    }
}

TEST(LocalTime, LongRowsStayNormalised) {
    LocalTimeChain chain(0.999);
    for (int i = 0; i < 3000; ++i) chain.advance();
    double s = 0.0;
    for (double v : chain.row()) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(LumpedEigenvalues, DecoupledWhenW2IsZero) {
    // Block diagonal: the diagonal entries d - (K-1) w1 with d = (N-1) w1.
    const std::size_t big_n = 5;
    const double w1 = 1.3;
    for (std::size_t n = 0; n <= 2 * big_n; ++n)
        for (std::size_t k = n > big_n ? n - big_n : 0; k <= std::min(n, big_n); ++k) {
            const auto [l1, l2] = lumped_eigenvalues(n, k, big_n, w1, 0.0);
            const double d = (big_n - 1.0) * w1;
            const double a = -(d - (big_n - k - 1.0) * w1), b = -(d - (big_n - (n - k) - 1.0) * w1);
            EXPECT_NEAR(std::max(l1, l2), std::max(a, b), 1e-12);
            EXPECT_NEAR(std::min(l1, l2), std::min(a, b), 1e-12);
        }
}

TEST(LumpedEigenvalues, MatchesGeneric2x2Solver) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    auto check = [](std::size_t n, std::size_t k, std::size_t big_n, double w1, double w2) {
        const double k1 = k, k2 = n - k, nn = big_n;
        Eigen::Matrix2d m;
        m << nn * w2 + k1 * w1, -(nn - k2) * w2, -(nn - k1) * w2, nn * w2 + k2 * w1;
        Eigen::EigenSolver<Eigen::Matrix2d> es(m);
        std::vector<double> ev{-es.eigenvalues()[0].real(), -es.eigenvalues()[1].real()};
        std::sort(ev.begin(), ev.end());
        const auto [l1, l2] = lumped_eigenvalues(n, k, big_n, w1, w2);
        EXPECT_NEAR(l2, ev[0], 1e-12 * (1.0 + std::abs(ev[0])));
        EXPECT_NEAR(l1, ev[1], 1e-12 * (1.0 + std::abs(ev[1])));
        EXPECT_LE(l1, 0.0);
        EXPECT_LE(l2, l1 + 1e-12 * std::abs(l1));
    };
    check(2, 1, 2, 1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const std::size_t big_n = 1 + rng() % 40;
        const std::size_t n = rng() % (2 * big_n + 1);
        const std::size_t lo = n > big_n ? n - big_n : 0, hi = std::min(n, big_n);
        const std::size_t k = lo + rng() % (hi - lo + 1);
        check(n, k, big_n, u(rng), u(rng));
    }
    EXPECT_THROW(lumped_eigenvalues(3, 4, 5, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(lumped_eigenvalues(5, 0, 4, 1.0, 1.0), std::invalid_argument);
}

TEST(Theta, EmptyPathIsOne) { EXPECT_NEAR(theta(0, 0, 7, 1.0, 0.3, 2.0), 1.0, 1e-15); }

TEST(Theta, MatchesDeterminantRatio) {
    for (std::size_t big_n : {1, 2, 3, 4})
        for (double q : {0.4, 1.0, 3.0}) {
            const double w1 = 1.0, w2 = 0.5;
            const auto g = expand(TwoCommunity{big_n, w1, w2});
            const double alpha = big_n * (w1 + w2);
            for (std::size_t n = 1; n <= 2 * big_n; ++n)
                for (std::size_t k = n > big_n ? n - big_n : 0; k <= std::min(n, big_n); ++k) {
                    const double ratio = determinant_ratio(g, q, lumped_path(n, k, big_n)) * std::pow(q + alpha, n);
                    EXPECT_NEAR(theta(n, k, big_n, w1, w2, q), ratio, 1e-9 * ratio)
                        << "N=" << big_n << " n=" << n << " k=" << k << " q=" << q;
                }
        }
}

TEST(Theta, MatchesParabolaRatio) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.05, 4.0);
    for (int i = 0; i < 100; ++i) {
        const std::size_t big_n = 1 + rng() % 200;
        const std::size_t n = rng() % (2 * big_n + 1);
        const std::size_t lo = n > big_n ? n - big_n : 0, hi = std::min(n, big_n);
        const std::size_t k = lo + rng() % (hi - lo + 1);
        const double w1 = u(rng), w2 = u(rng), q = u(rng);
        const double k1 = k, k2 = n - k, nn = big_n;
        const double num = q * q + ((k1 + k2) * w1 + 2 * nn * w2) * q + (w1 + w2) * ((k1 + k2) * nn * w2 + k1 * k2 * (w1 - w2));
        const double expected = num / (q * q + 2 * nn * w2 * q);
        EXPECT_NEAR(theta(n, k, big_n, w1, w2, q), expected, 1e-12 * expected);
    }
}

TEST(PDagger, EqualWeightsReduction) {
    const double w = 0.9, q = 1.4;
    const std::size_t big_n = 6;
    for (std::size_t n = 1; n <= 2 * big_n; ++n)
        for (std::size_t k = n > big_n ? n - big_n : 0; k <= std::min(n, big_n); ++k) {
            const double k1 = k, k2 = n - k, nn = big_n;
            const double expected = q * (q + 2 * nn * w) /
                                    ((q + k1 * w) * (q + k2 * w) + nn * w * (2 * q + n * w) + w * w * (nn * n - k1 * k2));
            for (Star s : {Star::In, Star::Out}) EXPECT_NEAR(p_dagger(n, k, big_n, w, w, q, s), expected, 1e-14);
            // On K_2N every vertex off the path is killed first with probability q/(q + n w).
            EXPECT_NEAR(expected, q / (q + n * w), 1e-12);
        }
}

TEST(PDagger, MatchesAbsorbingChainSolve) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.05, 4.0);
    for (int i = 0; i < 200; ++i) {
        const std::size_t big_n = 2 + rng() % 100;
        const std::size_t n = 1 + rng() % (2 * big_n - 1);
        const std::size_t lo = std::max<std::size_t>(1, n > big_n ? n - big_n : 0), hi = std::min(n, big_n);
        if (lo > hi) continue;
        const std::size_t k = lo + rng() % (hi - lo + 1);
        const double w1 = u(rng), w2 = u(rng), q = u(rng);
        const auto sol = absorption(k, n - k, big_n, w1, w2, q);
        if (k < big_n) {
            EXPECT_NEAR(p_dagger(n, k, big_n, w1, w2, q, Star::In), sol(0), 1e-10 * sol(0));
        }
        if (n - k < big_n) {
            EXPECT_NEAR(p_dagger(n, k, big_n, w1, w2, q, Star::Out), sol(1), 1e-10 * sol(1));
        }
    }
}

TEST(PDagger, MatchesSurvivalProbOnExpandedGraph) {
    const std::size_t big_n = 3;
    const double w1 = 1.0, w2 = 0.5, q = 0.8;
    const auto g = expand(TwoCommunity{big_n, w1, w2});
    // single vertex path {0}
    EXPECT_NEAR(p_dagger(1, 1, big_n, w1, w2, q, Star::In), survival_prob(g, q, {0}, 1), 1e-12);
    EXPECT_NEAR(p_dagger(1, 1, big_n, w1, w2, q, Star::Out), survival_prob(g, q, {0}, big_n), 1e-12);
    for (std::size_t n = 1; n <= 4; ++n)
        for (std::size_t k = std::max<std::size_t>(1, n > big_n ? n - big_n : 0); k <= std::min(n, big_n - 1); ++k) {
            const auto path = lumped_path(n, k, big_n);
            EXPECT_NEAR(p_dagger(n, k, big_n, w1, w2, q, Star::In), survival_prob(g, q, path, big_n - 1), 1e-12);
            if (n - k < big_n) {
                EXPECT_NEAR(p_dagger(n, k, big_n, w1, w2, q, Star::Out), survival_prob(g, q, path, 2 * big_n - 1), 1e-12);
            }
        }
}

TEST(EntropicFactor, CountsPathsAndStaysInUnitInterval) {
    // N=3, In: x=0, y=1; community 1 = {0,1,2}, community 2 = {3,4,5}.
    // k=2, n=3: choose the other community-1 vertex (1 way) and one community-2 vertex (3 ways),
    // ordered after x: 1 * 3 = 3 vertex sequences, scaled by N^-(n-1).
    EXPECT_NEAR(entropic_factor(3, 2, 3, Star::In), 3.0 / 9.0, 1e-15);
    EXPECT_NEAR(entropic_factor(3, 2, 3, Star::Out), 2.0 * 2.0 / 9.0, 1e-15);
    EXPECT_DOUBLE_EQ(entropic_factor(1, 1, 5, Star::In), 1.0);
    EXPECT_DOUBLE_EQ(entropic_factor(4, 0, 5, Star::In), 0.0);
    EXPECT_DOUBLE_EQ(entropic_factor(5, 4, 3, Star::In), 0.0);  // more than N-1 community-1 vertices besides y
    for (std::size_t big_n : {2, 10, 500})
        for (std::size_t n = 1; n <= 2 * big_n + 2; ++n)
            for (std::size_t k = 1; k <= n; ++k)
                for (Star s : {Star::In, Star::Out}) {
                    const double f = entropic_factor(n, k, big_n, s);
                    EXPECT_GE(f, 0.0);
                    EXPECT_LE(f, 1.0);
                }
}

// --- two-community potential ----------------------------------------------

TEST(TwoCommunityExact, MatchesEnumerationAtN2) {
    struct S {
        double w1, w2, q;
    };
    for (const S s : {S{1.0, 0.5, 1.0}, S{2.0, 0.3, 0.7}, S{0.4, 1.7, 2.5}}) {
        const auto g = expand(TwoCommunity{2, s.w1, s.w2});
        EXPECT_NEAR(u_two_community_exact({2, s.w1, s.w2, s.q, Star::In}).value, u_enumeration(g, s.q, 0, 1).value, 1e-9);
        EXPECT_NEAR(u_two_community_exact({2, s.w1, s.w2, s.q, Star::Out}).value, u_enumeration(g, s.q, 0, 2).value, 1e-9);
    }
    EXPECT_NEAR(u_two_community_exact({2, 1.0, 0.5, 1.0, Star::In}).value, 0.34375, 1e-12);
}

TEST(TwoCommunityExact, MatchesEnumerationAtN3) {
    const auto g = expand(TwoCommunity{3, 1.0, 0.2});
    EXPECT_NEAR(u_two_community_exact({3, 1.0, 0.2, 0.6, Star::In}).value, u_enumeration(g, 0.6, 0, 2).value, 1e-9);
    EXPECT_NEAR(u_two_community_exact({3, 1.0, 0.2, 0.6, Star::Out}).value, u_enumeration(g, 0.6, 1, 4).value, 1e-9);
}

TEST(TwoCommunityExact, EqualWeightsGiveCompleteGraph) {
    for (std::size_t n : {1, 2, 10, 40, 300})
        for (double q : {0.5, 3.0, 40.0}) {
            const double expected = u_complete_exact({2 * n, 0.7, q}).value;
            if (n >= 2) {
                EXPECT_NEAR(u_two_community_exact({n, 0.7, 0.7, q, Star::In}).value, expected, 1e-8 * expected);
            }
            EXPECT_NEAR(u_two_community_exact({n, 0.7, 0.7, q, Star::Out}).value, expected, 1e-8 * expected);
        }
}

TEST(TwoCommunityExact, AgreesWithPathByPathEvaluation) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int i = 0; i < 40; ++i) {
        const std::size_t big_n = 2 + rng() % 30;
        const double w1 = u(rng), w2 = u(rng), q = u(rng);
        for (Star s : {Star::In, Star::Out}) {
            const TwoCommunityParams p{big_n, w1, w2, q, s};
            const double a = u_two_community_exact(p, 0.0).value, b = u_two_community_paths(p).value;
            EXPECT_NEAR(a, b, 1e-10 * b) << big_n << " " << w1 << " " << w2 << " " << q;
        }
    }
}

TEST(TwoCommunityExact, SingleVertexCommunities) {
    // N=1: K_2 with weight w2 across.
    EXPECT_NEAR(u_two_community_exact({1, 1.0, 0.4, 1.2, Star::Out}).value, 1.2 / (1.2 + 0.8), 1e-14);
    EXPECT_THROW(u_two_community_exact({1, 1.0, 0.4, 1.2, Star::In}), std::invalid_argument);
    EXPECT_THROW(u_two_community_exact({4, 1.0, 0.0, 1.2, Star::Out}), std::invalid_argument);
}

TEST(TwoCommunityExact, TruncationMetadata) {
    const auto full = u_two_community_exact({20, 1.0, 0.3, 5.0, Star::Out});
    ASSERT_TRUE(full.n_max && full.tail_mass);
    EXPECT_EQ(*full.n_max, 40u);
    EXPECT_EQ(*full.tail_mass, 0.0);
    const auto cut = u_two_community_exact({2000, 1.0, 0.01, 400.0, Star::Out});
    ASSERT_TRUE(cut.n_max && cut.tail_mass);
    EXPECT_LT(*cut.n_max, 4000u);
    EXPECT_LT(*cut.tail_mass, 1e-12);
    const auto loose = u_two_community_exact({2000, 1.0, 0.01, 400.0, Star::Out}, 1e-6);
    EXPECT_LT(*loose.n_max, *cut.n_max);
    EXPECT_NEAR(loose.value, cut.value, 1e-5);
}

TEST(TwoCommunityExact, PhaseScaleValuesAreProbabilities) {
    for (std::size_t n : {100, 1600, 2000})
        for (double alpha : {0.2, 0.5, 0.8})
            for (double beta : {0.2, 0.9}) {
                const auto m = TwoCommunity::from_beta(n, beta);
                const double q = std::pow(static_cast<double>(n), alpha);
                for (Star s : {Star::In, Star::Out}) {
                    const double v = u_two_community_exact({n, m.w1, m.w2, q, s}).value;
                    EXPECT_TRUE(std::isfinite(v));
                    EXPECT_GT(v, 0.0);
                    EXPECT_LT(v, 1.0);
                }
            }
}

// --- small-graph oracles --------------------------------------------------

TEST(Marchal, SingleVertexOnK2) {
    const std::vector<Vertex> p{0};
    EXPECT_NEAR(marchal_le_prob(expand(Complete{2, 1.0}), 1.0, p), 2.0 / 3.0, 1e-15);
}

TEST(Marchal, NormalisedOverAllPaths) {
    WeightedGraph path(4);
    path.set_weight(0, 1, 1.0);
    path.set_weight(1, 2, 0.5);
    path.set_weight(2, 3, 2.0);
    for (const auto& g : {expand(Complete{3, 1.0}), expand(TwoCommunity{2, 1.0, 0.5}), path})
        for (double q : {0.5, 1.0, 2.0})
            for (Vertex x : {Vertex{0}, Vertex{1}}) {
                double total = 0.0;
                for_each_self_avoiding_path(g, x, [&](const std::vector<Vertex>& p) { total += marchal_le_prob(g, q, p); });
                EXPECT_NEAR(total, 1.0, 1e-9);
            }
}

TEST(Marchal, RejectsBadPaths) {
    const auto g = expand(Complete{3, 1.0});
    const std::vector<Vertex> repeat{0, 1, 0}, empty{};
    EXPECT_THROW(marchal_le_prob(g, 1.0, repeat), std::invalid_argument);
    EXPECT_THROW(marchal_le_prob(g, 1.0, empty), std::invalid_argument);
    WeightedGraph sparse(3);
    sparse.set_weight(0, 1, 1.0);
    const std::vector<Vertex> jump{0, 2};
    EXPECT_THROW(marchal_le_prob(sparse, 1.0, jump), std::invalid_argument);
}

TEST(Survival, Examples) {
    const auto g = expand(Complete{6, 0.7});
    const double q = 1.3;
    EXPECT_NEAR(survival_prob(g, q, {}, 2), 1.0, 1e-14);
    for (std::size_t h = 1; h <= 5; ++h) {
        std::vector<Vertex> gamma;
        for (Vertex v = 0; v < h; ++v) gamma.push_back(v);
        EXPECT_NEAR(survival_prob(g, q, gamma, 5), q / (q + h * 0.7), 1e-13);
    }
    WeightedGraph star(4);
    for (Vertex v = 1; v < 4; ++v) star.set_weight(0, v, 0.5 * v);
    EXPECT_NEAR(survival_prob(star, q, {1, 2, 3}, 0), q / (q + star.degree(0)), 1e-14);
    EXPECT_THROW(survival_prob(g, q, {1, 2}, 2), std::invalid_argument);
}

TEST(Enumeration, Potentials) {
    EXPECT_NEAR(u_enumeration(expand(Complete{2, 1.0}), 2.0, 0, 1).value, 0.5, 1e-12);
    EXPECT_NEAR(u_enumeration(expand(Complete{2, 1.0}), 0.7, 1, 0).value, 0.7 / 2.7, 1e-12);
    EXPECT_NEAR(u_enumeration(expand(Complete{3, 1.0}), 1.0, 0, 2).value, 0.3125, 1e-12);
    EXPECT_EQ(u_enumeration(expand(Complete{3, 1.0}), 1.0, 0, 2).method, Method::Enumeration);
    EXPECT_THROW(u_enumeration(WeightedGraph(1), 1.0, 0, 0), std::invalid_argument);
    EXPECT_THROW(u_enumeration(expand(Complete{13, 1.0}), 1.0, 0, 1), std::invalid_argument);
}

TEST(Enumeration, BothRoutesAgree) {
    WeightedGraph g(5);
    g.set_weight(0, 1, 1.0);
    g.set_weight(1, 2, 0.3);
    g.set_weight(2, 3, 2.0);
    g.set_weight(3, 4, 0.8);
    g.set_weight(0, 4, 1.1);
    g.set_weight(1, 3, 0.6);
    for (double q : {0.2, 1.0, 5.0})
        for (Vertex y = 1; y < 5; ++y) {
            const auto both = u_enumeration_both(g, q, 0, y);
            EXPECT_NEAR(both.by_forests, both.by_paths, 1e-12);
            EXPECT_GT(both.by_forests, 0.0);
            EXPECT_LT(both.by_forests, 1.0);
        }
}
