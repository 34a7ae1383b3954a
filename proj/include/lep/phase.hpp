#pragma once

// Regime classification in the (alpha, beta) plane for q = N^alpha, w1 = 1,
// w2 = N^-beta, and N-ladder sweeps of the in/out potentials.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "graph.hpp"
#include "montecarlo.hpp"
#include "potentials.hpp"

namespace lep {

/// Exact rational with 64-bit numerator and positive denominator.
class Rational {
public:
    Rational() = default;
    Rational(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den) {
        if (den == 0) throw std::invalid_argument("rational with zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    /// Accepts "p/q", integers and plain decimals ("0.35", "-0.2"). Decimals
    /// convert exactly, so "0.3" is 3/10. Exponent notation is rejected.
    static Rational parse(std::string_view s) {
        auto trim = [](std::string_view v) {
            while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
            while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
            return v;
        };
        s = trim(s);
        if (s.empty()) throw std::invalid_argument("empty rational");
        if (const auto slash = s.find('/'); slash != std::string_view::npos) {
            const auto p = parse_int(trim(s.substr(0, slash)));
            const auto q = parse_int(trim(s.substr(slash + 1)));
            return Rational(p, q);
        }
        bool negative = false;
        std::string_view body = s;
        if (body.front() == '-' || body.front() == '+') {
            negative = body.front() == '-';
            body.remove_prefix(1);
        }
        const auto dot = body.find('.');
        std::string digits(body.substr(0, dot));
        std::int64_t den = 1;
        if (dot != std::string_view::npos) {
            const auto frac = body.substr(dot + 1);
            if (frac.size() > 15) throw std::invalid_argument("too many decimal places: " + std::string(s));
            digits += frac;
            for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        }
        if (digits.empty()) throw std::invalid_argument("malformed number: " + std::string(s));
        const auto num = parse_int(digits);
        return Rational(negative ? -num : num, den);
    }

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }
    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend bool operator==(const Rational& a, const Rational& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
    friend auto operator<=>(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num_) * b.den_ <=> static_cast<__int128>(b.num_) * a.den_;
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }

    /// Shortest decimal that round-trips through double ("0.3", "0.5").
    std::string decimal() const {
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, to_double());
        return std::string(buf, res.ptr);
    }

    std::string text() const { return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_); }

private:
    static std::int64_t parse_int(std::string_view s) {
        std::int64_t v = 0;
        const auto* end = s.data() + s.size();
        const auto res = std::from_chars(s.data(), end, v);
        if (res.ec != std::errc{} || res.ptr != end) throw std::invalid_argument("malformed number: " + std::string(s));
        return v;
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

enum class Regime { A, B, C, D, E, F };

inline char label(Regime r) { return static_cast<char>('a' + static_cast<int>(r)); }

struct Classification {
    Regime regime = Regime::D;
    bool anticommunity = false;  // beta < 0
    bool triple_point = false;   // alpha = 1/2 = 1 - beta
};

/// (a) 1-b < a = 1/2; (b) 1-b < a < 1/2; (c) a = 1-b < 1/2;
/// (d) a < min(1/2, 1-b); (e) a = 1/2 < 1-b; (f) a > 1/2.
/// The point a = 1/2 = 1-b belongs to none of the six cases; it is reported
/// as (e) with triple_point set.
inline Classification classify_regime(const Rational& alpha, const Rational& beta) {
    const Rational half(1, 2);
    const Rational mix = Rational(1) - beta;  // 1 - beta
    Classification c;
    c.anticommunity = beta < Rational(0);
    if (alpha > half) {
        c.regime = Regime::F;
    } else if (alpha == half) {
        if (mix < alpha) c.regime = Regime::A;
        else {
            c.regime = Regime::E;
            c.triple_point = mix == alpha;
        }
    } else if (mix < alpha) {
        c.regime = Regime::B;
    } else if (mix == alpha) {
        c.regime = Regime::C;
    } else {
        c.regime = Regime::D;
    }
    return c;
}

/// Large-N limits of (u_in, u_out) per regime: "0", "1", or "(0,1)" for a
/// nondegenerate constant.
struct PredictedLimit {
    std::string u_in;
    std::string u_out;
};

inline PredictedLimit predicted_limit(Regime r) {
    switch (r) {
        case Regime::A: return {"(0,1)", "1"};
        case Regime::B: return {"0", "1"};
        case Regime::C: return {"0", "(0,1)"};
        case Regime::D: return {"0", "0"};
        case Regime::E: return {"(0,1)", "(0,1)"};
        case Regime::F: return {"1", "1"};
    }
    return {};
}

struct GridPoint {
    Rational alpha;
    Rational beta;
};

/// One point per regime.
inline std::vector<GridPoint> default_grid() {
    return {
        {Rational(1, 2), Rational(9, 10)},   // a
        {Rational(3, 10), Rational(9, 10)},  // b
        {Rational(3, 10), Rational(7, 10)},  // c
        {Rational(1, 5), Rational(1, 5)},    // d
        {Rational(1, 2), Rational(1, 5)},    // e
        {Rational(4, 5), Rational(1, 2)},    // f
    };
}

inline const std::vector<std::size_t>& default_ladder() {
    static const std::vector<std::size_t> ladder{100, 400, 1600};
    return ladder;
}

struct PhaseRow {
    std::size_t n = 0;
    double q = 0.0;
    double w2 = 0.0;
    double u_in = 0.0;
    double u_in_err = 0.0;
    double u_out = 0.0;
    double u_out_err = 0.0;
    Method method = Method::Exact;

    double gap() const { return u_out - u_in; }
};

struct PhasePoint {
    Rational alpha;
    Rational beta;
    Classification regime;
    std::vector<PhaseRow> rows;  // one per N, in ladder order
};

struct SweepOptions {
    std::size_t exact_limit = 2000;  // largest N evaluated with the exact formula
    McConfig mc;                     // used above exact_limit
};

inline double detectability_gap(const PhaseRow& row) { return row.gap(); }

inline PhaseRow evaluate_point(const GridPoint& pt, std::size_t n, const SweepOptions& opt, std::uint64_t stream) {
    PhaseRow row;
    row.n = n;
    const double nn = static_cast<double>(n);
    row.q = std::pow(nn, pt.alpha.to_double());
    row.w2 = std::pow(nn, -pt.beta.to_double());
    if (n <= opt.exact_limit) {
        row.method = Method::Exact;
        row.u_in = u_two_community_exact({n, 1.0, row.w2, row.q, Star::In}).value;
        row.u_out = u_two_community_exact({n, 1.0, row.w2, row.q, Star::Out}).value;
    } else {
        row.method = Method::MonteCarlo;
        const MeanFieldModel model = TwoCommunity{n, 1.0, row.w2};
        McConfig cfg = opt.mc;
        cfg.max_concurrency = 1;
        cfg.base_seed = mix_seed(opt.mc.base_seed, 2 * stream);
        const auto in = estimate_potential(model, row.q, 0, 1, cfg, PotentialEstimator::Decomposition);
        cfg.base_seed = mix_seed(opt.mc.base_seed, 2 * stream + 1);
        const auto out = estimate_potential(model, row.q, 0, n, cfg, PotentialEstimator::Decomposition);
        row.u_in = in.mean;
        row.u_in_err = in.stderr_;
        row.u_out = out.mean;
        row.u_out_err = out.stderr_;
    }
    return row;
}

/// Evaluates every (point, N) job; jobs run concurrently up to
/// opt.mc.max_concurrency and are reported in grid order.
inline std::vector<PhasePoint> sweep(const std::vector<GridPoint>& grid, const std::vector<std::size_t>& ladder,
                                     const SweepOptions& opt) {
    if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
    if (ladder.empty()) throw std::invalid_argument("sweep: empty N ladder");
    for (auto n : ladder)
        if (n < 2) throw std::invalid_argument("sweep: N must be >= 2");
    const std::uint64_t jobs = grid.size() * ladder.size();
    McConfig runner;
    runner.n_samples = jobs;
    runner.batch_size = 1;
    runner.max_concurrency = opt.mc.max_concurrency;
    const auto rows = run_batches(runner, [&](std::uint64_t job, std::uint64_t, std::uint64_t) {
        const auto& pt = grid[job / ladder.size()];
        const std::size_t n = ladder[job % ladder.size()];
        try {
            return evaluate_point(pt, n, opt, job);
        } catch (const std::exception& e) {
            throw std::runtime_error("sweep point alpha=" + pt.alpha.text() + " beta=" + pt.beta.text() +
                                     " N=" + std::to_string(n) + ": " + e.what());
        }
    });
    std::vector<PhasePoint> out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        PhasePoint p{grid[i].alpha, grid[i].beta, classify_regime(grid[i].alpha, grid[i].beta), {}};
        for (std::size_t j = 0; j < ladder.size(); ++j) p.rows.push_back(rows[i * ladder.size() + j]);
        out.push_back(std::move(p));
    }
    return out;
}

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string phase_csv(const std::vector<PhasePoint>& points) {
    std::ostringstream os;
    os << "alpha,beta,regime,N,u_in,u_in_err,u_out,u_out_err,gap\n";
    for (const auto& p : points)
        for (const auto& r : p.rows)
            os << p.alpha.decimal() << ',' << p.beta.decimal() << ',' << label(p.regime.regime) << ',' << r.n << ','
               << format_double(r.u_in) << ',' << format_double(r.u_in_err) << ',' << format_double(r.u_out) << ','
               << format_double(r.u_out_err) << ',' << format_double(r.gap()) << '\n';
    return os.str();
}

}  // namespace lep
