// lep: sample loop-erased partitions, evaluate interaction potentials,
// scan the two-community phase diagram and run the verification suites.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lep/lep.hpp"

#ifndef LEP_VERSION
#define LEP_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::uint64_t seed = 1;
    bool seed_given = false;
    unsigned jobs = 1;
    std::string out;
    std::string format = "json";
    bool timing = false;
};

struct ModelArgs {
    std::string model;
    std::string graph;
    std::size_t n = 0;
    double w = 1.0;
    double w1 = 1.0;
    double w2 = 0.0;
    double q = 0.0;
    std::optional<std::string> alpha, beta;
};

void add_model_options(CLI::App* cmd, ModelArgs& m, bool with_graph) {
    cmd->add_option("--model", m.model, "Mean-field model")->check(CLI::IsMember({"complete", "two-community"}));
    if (with_graph) cmd->add_option("--graph", m.graph, "Edge-list graph file");
    cmd->add_option("--N", m.n, "Vertices (complete) or community size (two-community)");
    cmd->add_option("--w", m.w, "Edge weight of the complete graph");
    cmd->add_option("--w1", m.w1, "Within-community weight");
    cmd->add_option("--w2", m.w2, "Between-community weight");
    cmd->add_option("--q", m.q, "Killing rate");
    cmd->add_option("--alpha", m.alpha, "Sets q = N^alpha");
    cmd->add_option("--beta", m.beta, "Sets w1 = 1, w2 = N^-beta");
}

/// Applies --alpha/--beta and checks that exactly one source was chosen.
void resolve(ModelArgs& m) {
    if (m.model.empty() == m.graph.empty()) throw UsageError("give exactly one of --model or --graph");
    if (!m.model.empty() && m.n == 0) throw UsageError("--N is required with --model");
    const double n = static_cast<double>(m.n);
    if (m.alpha) {
        if (m.model.empty()) throw UsageError("--alpha needs --model");
        m.q = std::pow(n, lep::Rational::parse(*m.alpha).to_double());
    }
    if (m.beta) {
        if (m.model != "two-community") throw UsageError("--beta needs --model two-community");
        m.w1 = 1.0;
        m.w2 = std::pow(n, -lep::Rational::parse(*m.beta).to_double());
    }
    if (!(m.q > 0.0) || !std::isfinite(m.q)) throw UsageError("--q must be a finite value > 0");
}

lep::MeanFieldModel make_model(const ModelArgs& m) {
    lep::MeanFieldModel model;
    if (m.model == "complete") model = lep::Complete{m.n, m.w};
    else model = lep::TwoCommunity{m.n, m.w1, m.w2};
    try {
        lep::validate(model);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return model;
}

lep::WeightedGraph load_graph(const std::string& path) {
    try {
        return lep::read_graph_file(path);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
}

json model_config(const ModelArgs& m) {
    json c;
    if (!m.graph.empty()) {
        c["graph"] = m.graph;
    } else {
        c["model"] = m.model;
        c["N"] = m.n;
        if (m.model == "complete") c["w"] = m.w;
        else {
            c["w1"] = m.w1;
            c["w2"] = m.w2;
        }
        if (m.alpha) c["alpha"] = *m.alpha;
        if (m.beta) c["beta"] = *m.beta;
    }
    c["q"] = m.q;
    return c;
}

json envelope(const std::string& command, json config, const Globals& g) {
    json doc;
    doc["command"] = command;
    doc["version"] = LEP_VERSION;
    config["seed"] = g.seed;
    config["jobs"] = g.jobs;
    config["format"] = g.format;
    doc["config"] = std::move(config);
    return doc;
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw UsageError("cannot write " + path);
    os << text;
}

lep::McConfig mc_config(const Globals& g, std::uint64_t samples) {
    lep::McConfig c;
    c.n_samples = samples;
    c.batch_size = std::min<std::uint64_t>(samples, 10000);
    c.base_seed = g.seed;
    c.max_concurrency = g.jobs;
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return c;
}

json record_json(const lep::BlockRecord& r, bool with_purity) {
    json j;
    j["n_blocks"] = r.n_blocks;
    j["sizes"] = r.sizes;
    if (with_purity) j["purity"] = r.purity;
    return j;
}

// ---------------------------------------------------------------------------

struct SampleArgs {
    ModelArgs m;
    std::uint64_t count = 1;
};

int cmd_sample_forest(SampleArgs& a, const Globals& g) {
    resolve(a.m);
    if (a.count == 0) throw UsageError("--count must be >= 1");
    std::vector<int> community;
    std::vector<lep::RootedForest> forests;
    auto sample_all = [&](const auto& kernel) {
        lep::McConfig cfg = mc_config(g, a.count);
        cfg.batch_size = 1;
        const auto parts = lep::run_batches(cfg, [&](std::uint64_t, std::uint64_t seed, std::uint64_t) {
            lep::Rng rng(seed);
            return lep::wilson_forest(kernel, rng, lep::ascending_order(kernel.n_vertices()));
        });
        forests.assign(parts.begin(), parts.end());
    };
    if (!a.m.graph.empty()) {
        sample_all(lep::DenseWalkKernel(load_graph(a.m.graph), a.m.q));
    } else {
        const auto model = make_model(a.m);
        if (a.m.model == "two-community") community = lep::model_communities(model);
        sample_all(lep::MeanFieldWalkKernel(model, a.m.q));
    }

    const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw UsageError("cannot create output directory " + dir.string());
    json config = model_config(a.m);
    config["count"] = a.count;
    config["out"] = dir.string();
    json doc = envelope("sample-forest", config, g);
    json samples = json::array();
    std::map<std::uint32_t, std::uint64_t> hist;
    for (std::size_t i = 0; i < forests.size(); ++i) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "%06zu", i);
        const auto partition = lep::forest_to_partition(forests[i]);
        const std::string forest_file = std::string("forest_") + stem + ".txt";
        const std::string partition_file = std::string("partition_") + stem + ".txt";
        emit(lep::write_forest(forests[i]), (dir / forest_file).string());
        emit(lep::write_partition(partition), (dir / partition_file).string());
        const auto rec = lep::summarize_partition(partition, community);
        ++hist[rec.n_blocks];
        json s = record_json(rec, !community.empty());
        s["forest"] = forest_file;
        s["partition"] = partition_file;
        samples.push_back(std::move(s));
    }
    if (g.format == "csv") {
        std::ostringstream os;
        os << "value,count\n";
        for (const auto& [k, v] : hist) os << k << ',' << v << '\n';
        emit(os.str(), (dir / "block_counts.csv").string());
        std::cout << os.str();
        return 0;
    }
    doc["samples"] = std::move(samples);
    json h = json::array();
    for (const auto& [k, v] : hist) h.push_back({{"value", k}, {"count", v}});
    doc["block_count_histogram"] = std::move(h);
    const std::string text = doc.dump(2) + "\n";
    emit(text, (dir / "summary.json").string());
    std::cout << text;
    return 0;
}

// ---------------------------------------------------------------------------

struct PotentialArgs {
    ModelArgs m;
    std::string mode = "exact";
    std::optional<std::size_t> x, y;
    std::string star = "out";
    std::uint64_t samples = 100000;
};

int cmd_potential(PotentialArgs& a, const Globals& g) {
    resolve(a.m);
    if (g.format != "json") throw UsageError("potential only supports --format json");
    const bool two = a.m.model == "two-community";
    lep::Vertex x = a.x.value_or(0), y = 0;
    if (a.y) y = *a.y;
    else if (two) y = a.star == "in" ? 1 : a.m.n;
    else if (a.m.model == "complete") y = 1;
    else throw UsageError("--y is required with --graph");

    json config = model_config(a.m);
    config["mode"] = a.mode;
    config["x"] = x;
    config["y"] = y;
    if (two && !a.x && !a.y) config["star"] = a.star;
    if (a.mode == "mc") config["samples"] = a.samples;

    std::optional<lep::WeightedGraph> graph;
    std::optional<lep::MeanFieldModel> model;
    if (!a.m.graph.empty()) graph = load_graph(a.m.graph);
    else model = make_model(a.m);
    const std::size_t n_vertices = graph ? graph->n_vertices() : lep::model_vertices(*model);
    if (x >= n_vertices || y >= n_vertices || x == y) throw UsageError("invalid vertex pair");

    lep::PotentialResult result;
    if (a.mode == "exact") {
        if (!model) throw UsageError("exact mode needs --model");
        if (two) {
            // The exact formula is stated from vertex 0 to a same- or other-community vertex; map the
            // pair by symmetry.
            const auto comm = lep::model_communities(*model);
            const auto star = comm[x] == comm[y] ? lep::Star::In : lep::Star::Out;
            result = lep::u_two_community_exact({a.m.n, a.m.w1, a.m.w2, a.m.q, star});
        } else {
            result = lep::u_complete_exact({a.m.n, a.m.w, a.m.q});
        }
    } else if (a.mode == "mc") {
        const auto cfg = mc_config(g, a.samples);
        const auto est = graph ? lep::estimate_potential(*graph, a.m.q, x, y, cfg)
                               : lep::estimate_potential(*model, a.m.q, x, y, cfg);
        result.value = est.mean;
        result.method = lep::Method::MonteCarlo;
        result.stderr_ = est.stderr_;
    } else {
        const auto gr = graph ? *graph : lep::expand(*model);
        if (gr.n_vertices() > lep::kMaxEnumerationVertices)
            throw UsageError("enumeration is limited to " + std::to_string(lep::kMaxEnumerationVertices) + " vertices");
        result = lep::u_enumeration(gr, a.m.q, x, y);
    }

    json doc = envelope("potential", config, g);
    json r;
    r["value"] = result.value;
    r["method"] = lep::to_string(result.method);
    if (result.stderr_) r["stderr"] = *result.stderr_;
    if (result.n_max) r["n_max"] = *result.n_max;
    if (result.tail_mass) r["tail_mass"] = *result.tail_mass;
    if (a.mode == "mc") r["seed"] = g.seed;
    doc["result"] = std::move(r);
    emit(doc.dump(2) + "\n", g.out);
    return 0;
}

// ---------------------------------------------------------------------------

struct PhaseArgs {
    std::vector<std::string> points;
    std::string ladder;
    std::uint64_t samples = 10000;
    std::size_t exact_limit = 2000;
};

std::vector<lep::GridPoint> parse_grid(const std::vector<std::string>& specs) {
    if (specs.empty()) return lep::default_grid();
    std::vector<lep::GridPoint> grid;
    for (const auto& s : specs) {
        const auto colon = s.find(':');
        if (colon == std::string::npos) throw UsageError("grid point must be alpha:beta, got '" + s + "'");
        try {
            grid.push_back({lep::Rational::parse(s.substr(0, colon)), lep::Rational::parse(s.substr(colon + 1))});
        } catch (const std::invalid_argument& e) {
            throw UsageError("malformed grid point '" + s + "': " + e.what());
        }
    }
    return grid;
}

std::vector<std::size_t> parse_ladder(const std::string& text) {
    if (text.empty()) return lep::default_ladder();
    std::vector<std::size_t> ladder;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t v = 0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (res.ec != std::errc{} || res.ptr != item.data() + item.size() || v < 2)
            throw UsageError("malformed N ladder entry '" + item + "'");
        ladder.push_back(v);
    }
    if (ladder.empty()) throw UsageError("empty N ladder");
    return ladder;
}

int cmd_phase_scan(PhaseArgs& a, const Globals& g) {
    const auto grid = parse_grid(a.points);
    const auto ladder = parse_ladder(a.ladder);
    lep::SweepOptions opt;
    opt.exact_limit = a.exact_limit;
    opt.mc = mc_config(g, a.samples);
    opt.mc.batch_size = std::min<std::uint64_t>(a.samples, 1000);
    const auto points = lep::sweep(grid, ladder, opt);
    if (g.format == "csv") {
        emit(lep::phase_csv(points), g.out);
        return 0;
    }
    json config;
    json gj = json::array();
    for (const auto& p : grid) gj.push_back({{"alpha", p.alpha.text()}, {"beta", p.beta.text()}});
    config["grid"] = std::move(gj);
    config["ladder"] = ladder;
    config["samples"] = a.samples;
    config["exact_limit"] = a.exact_limit;
    json doc = envelope("phase-scan", config, g);
    json rows = json::array();
    for (const auto& p : points) {
        const auto limit = lep::predicted_limit(p.regime.regime);
        for (const auto& r : p.rows) {
            json row;
            row["alpha"] = p.alpha.text();
            row["beta"] = p.beta.text();
            row["regime"] = std::string(1, lep::label(p.regime.regime));
            if (p.regime.triple_point) row["triple_point"] = true;
            if (p.regime.anticommunity) row["anticommunity"] = true;
            row["N"] = r.n;
            row["q"] = r.q;
            row["w2"] = r.w2;
            row["method"] = lep::to_string(r.method);
            row["u_in"] = r.u_in;
            row["u_in_err"] = r.u_in_err;
            row["u_out"] = r.u_out;
            row["u_out_err"] = r.u_out_err;
            row["gap"] = r.gap();
            row["predicted_limit"] = {{"u_in", limit.u_in}, {"u_out", limit.u_out}};
            rows.push_back(std::move(row));
        }
    }
    doc["rows"] = std::move(rows);
    emit(doc.dump(2) + "\n", g.out);
    return 0;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
    std::string suite;
    std::vector<std::string> graphs;
    bool corrupt_weight = false;
};

int cmd_verify(VerifyArgs& a, const Globals& g) {
    if (g.format != "json") throw UsageError("verify only supports --format json");
    lep::verify::Options opt;
    opt.seed = g.seed;
    opt.jobs = g.jobs;
    opt.corrupt_weight = a.corrupt_weight;
    if (!a.graphs.empty()) {
        opt.graphs.clear();
        for (const auto& path : a.graphs) {
            auto gr = load_graph(path);
            if (gr.n_vertices() > 6) throw UsageError("oracle graphs are limited to 6 vertices: " + path);
            opt.graphs.push_back({fs::path(path).stem().string(), std::move(gr)});
        }
    }
    const auto report = lep::verify::run_suite(a.suite, opt);
    json config;
    config["suite"] = a.suite;
    if (!a.graphs.empty()) config["graphs"] = a.graphs;
    if (a.corrupt_weight) config["corrupt_weight"] = true;
    json doc = envelope("verify", config, g);
    json checks = json::array();
    for (const auto& c : report.checks) {
        json j;
        j["criterion"] = c.criterion;
        j["name"] = c.name;
        j["measured"] = c.measured;
        j["expected"] = c.expected;
        j["tolerance"] = c.tolerance;
        j["relation"] = c.relation;
        j["passed"] = c.passed;
        checks.push_back(std::move(j));
    }
    doc["checks"] = std::move(checks);
    doc["passed"] = report.passed();
    emit(doc.dump(2) + "\n", g.out);
    for (const auto& c : report.checks)
        std::cerr << (c.passed ? "PASS " : "FAIL ") << "[" << c.criterion << "] " << c.name << '\n';
    return report.passed() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Loop-erased partitions and interaction potentials on weighted graphs"};
    app.set_version_flag("--version", std::string(LEP_VERSION));
    app.require_subcommand(1);

    Globals g;
    auto* seed_opt = app.add_option("--seed", g.seed, "Base RNG seed (falls back to LEP_SEED)");
    app.add_option("--jobs", g.jobs, "Maximum worker threads")->check(CLI::Range(1u, 1024u));
    app.add_option("--out", g.out, "Output file (directory for sample-forest)");
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    app.add_flag("--timing", g.timing, "Report wall-clock time on stderr");
    app.fallthrough();

    SampleArgs sample;
    auto* c_sample = app.add_subcommand("sample-forest", "Sample rooted forests with Wilson's algorithm");
    add_model_options(c_sample, sample.m, true);
    c_sample->add_option("--count", sample.count, "Number of forests");

    PotentialArgs pot;
    auto* c_pot = app.add_subcommand("potential", "Pairwise interaction potential U_q(x,y)");
    add_model_options(c_pot, pot.m, true);
    c_pot->add_option("--mode", pot.mode)->check(CLI::IsMember({"exact", "mc", "enum"}));
    c_pot->add_option("--x", pot.x, "First vertex");
    c_pot->add_option("--y", pot.y, "Second vertex");
    c_pot->add_option("--star", pot.star, "Second vertex in the same community or the other one")
        ->check(CLI::IsMember({"in", "out"}));
    c_pot->add_option("--samples", pot.samples, "Monte Carlo samples");

    PhaseArgs phase;
    auto* c_phase = app.add_subcommand("phase-scan", "Two-community potentials over an (alpha, beta) grid");
    c_phase->add_option("--point", phase.points, "Grid point alpha:beta (repeatable; default one per regime)");
    c_phase->add_option("--ladder", phase.ladder, "Comma-separated N values (default 100,400,1600)");
    c_phase->add_option("--samples", phase.samples, "Monte Carlo samples above the exact limit");
    c_phase->add_option("--exact-limit", phase.exact_limit, "Largest N evaluated exactly");

    VerifyArgs ver;
    auto* c_ver = app.add_subcommand("verify", "Run a verification suite");
    c_ver->add_option("suite", ver.suite)->required()->check(CLI::IsMember({"oracle", "formulas", "phase"}));
    c_ver->add_option("--graph", ver.graphs, "Replace the oracle graphs with these files");
    c_ver->add_flag("--corrupt-weight", ver.corrupt_weight, "Sample from a perturbed graph (negative control)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (seed_opt->count() == 0) {
        if (const char* env = std::getenv("LEP_SEED")) {
            const std::string s(env);
            const auto res = std::from_chars(s.data(), s.data() + s.size(), g.seed);
            if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
                std::cerr << "error: LEP_SEED is not an unsigned integer\n";
                return 1;
            }
        }
    }

    const auto start = std::chrono::steady_clock::now();
    int code = 0;
    try {
        if (*c_sample) code = cmd_sample_forest(sample, g);
        else if (*c_pot) code = cmd_potential(pot, g);
        else if (*c_phase) code = cmd_phase_scan(phase, g);
        else code = cmd_verify(ver, g);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    if (g.timing) {
        const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        std::cerr << "runtime_ms " << ms << '\n';
    }
    return code;
}
