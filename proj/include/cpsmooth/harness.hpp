// Declarative experiment harness: JSON config in, CSV/JSON artifacts out.
//
// A config names a scenario, a list of block templates whose parameters
// (n, p, w, N) are grids, a window policy, and the bound variants to
// evaluate.  The grid is the cross product of every template's parameter
// lists; each grid point instantiates N copies of each template, computes
// the exact law and the scenario's approximants, evaluates distances,
// validity conditions and bound shapes, and becomes one CSV row.  Failures
// abort only their own grid point and are recorded in the row.
//
// The lemma-suite scenario instead runs seeded randomized instances of the
// inequality validators and records one row per check.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "approximants.hpp"
#include "blocks.hpp"
#include "bounds.hpp"
#include "errors.hpp"
#include "measure.hpp"

namespace cpsmooth {

// --------------------------------------------------------------------------
// Config
// --------------------------------------------------------------------------

struct BlockTemplate {
    std::string kind; // two_runs | bernoulli | iid_lattice | latent_driver | general_jump
    std::vector<int> n{1};
    std::vector<double> p{0.0};
    std::vector<double> w{1.0};
    std::vector<int> copies{1}; // "N" in the config: identical copies per grid point
    std::vector<double> pmf;    // iid_lattice
    std::vector<double> driver_probs;
    std::vector<std::vector<long long>> link;
    std::vector<std::pair<double, double>> jump_atoms; // general_jump
};

struct Tolerances {
    double series_tol = 1e-12;
    double merge_rel = 1e-9;
    double prune_threshold = 1e-15;
    double quadrature_rel = 1e-6;

    MeasureOptions measure_opts() const { return {merge_rel, prune_threshold}; }
    QuadratureOptions quad_opts() const { return {2048, quadrature_rel}; }
};

struct ExperimentConfig {
    int schema_version = 1;
    std::string scenario;
    std::vector<BlockTemplate> templates;
    double fixed_h = std::numeric_limits<double>::quiet_NaN(); // NaN: half-min-weight
    std::vector<BoundVariant> variants;
    std::uint64_t seed = 7;
    std::string output = "out";
    Tolerances tol;
    Gamma1Reading gamma1_reading = Gamma1Reading::per_block;
};

namespace detail {

inline const std::set<std::string>& known_scenarios() {
    static const std::set<std::string> s{"tworuns-smoothing", "poisson-binomial", "franken",
                                         "generalized", "lemma-suite"};
    return s;
}

inline std::vector<BoundVariant> default_variants(const std::string& scenario) {
    using V = BoundVariant;
    if (scenario == "tworuns-smoothing")
        return {V::onedep_first, V::onedep_second, V::runs_naive, V::runs_joint};
    if (scenario == "poisson-binomial")
        return {V::bernoulli_sqrt, V::bernoulli_min, V::berry_esseen, V::poisson_min};
    if (scenario == "franken") return {V::iid_first, V::iid_second, V::berry_esseen};
    if (scenario == "generalized") return {V::jump_first, V::jump_second};
    return {};
}

/// Kinds each variant can be evaluated on (template kind strings).
inline bool variant_accepts(BoundVariant v, const std::string& kind) {
    const bool counting = kind != "general_jump";
    switch (v) {
        case BoundVariant::onedep_first:
        case BoundVariant::onedep_second: return counting;
        case BoundVariant::iid_first:
        case BoundVariant::iid_second: return kind == "iid_lattice" || kind == "bernoulli";
        case BoundVariant::bernoulli_min:
        case BoundVariant::bernoulli_sqrt: return kind == "bernoulli";
        case BoundVariant::jump_first:
        case BoundVariant::jump_second:
        case BoundVariant::summandwise: return kind == "general_jump";
        case BoundVariant::runs_naive:
        case BoundVariant::runs_joint: return kind == "two_runs";
        case BoundVariant::berry_esseen: return true;
        case BoundVariant::poisson_min: return kind == "bernoulli" || kind == "general_jump";
    }
    return false;
}

template <typename T>
std::vector<T> list_of(const nlohmann::json& j, const char* field) {
    std::vector<T> out;
    if (j.is_array())
        for (const auto& e : j) out.push_back(e.get<T>());
    else
        out.push_back(j.get<T>());
    if (out.empty()) throw input_error(std::string("config: '") + field + "' grid is empty");
    return out;
}

} // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    ExperimentConfig cfg;
    try {
        if (!j.contains("schema_version"))
            throw input_error("config: missing 'schema_version'");
        cfg.schema_version = j.at("schema_version").get<int>();
        if (cfg.schema_version != 1)
            throw input_error("config: unsupported schema_version " +
                              std::to_string(cfg.schema_version));
        cfg.scenario = j.at("scenario").get<std::string>();
        if (!detail::known_scenarios().count(cfg.scenario))
            throw input_error("config: unknown scenario '" + cfg.scenario + "'");

        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("output")) cfg.output = j.at("output").get<std::string>();
        if (j.contains("gamma1_reading")) {
            const std::string g = j.at("gamma1_reading").get<std::string>();
            if (g == "per_block") cfg.gamma1_reading = Gamma1Reading::per_block;
            else if (g == "global") cfg.gamma1_reading = Gamma1Reading::global;
            else throw input_error("config: gamma1_reading must be 'per_block' or 'global'");
        }
        if (j.contains("h_policy")) {
            const auto& hp = j.at("h_policy");
            if (hp.is_string()) {
                if (hp.get<std::string>() != "half-min-weight")
                    throw input_error("config: h_policy must be a number or 'half-min-weight'");
            } else {
                cfg.fixed_h = hp.get<double>();
                if (!(cfg.fixed_h > 0)) throw input_error("config: fixed h must be > 0");
            }
        }
        if (j.contains("tolerances")) {
            const auto& t = j.at("tolerances");
            if (t.contains("series_tol")) cfg.tol.series_tol = t.at("series_tol").get<double>();
            if (t.contains("merge_rel")) cfg.tol.merge_rel = t.at("merge_rel").get<double>();
            if (t.contains("prune_threshold"))
                cfg.tol.prune_threshold = t.at("prune_threshold").get<double>();
            if (t.contains("quadrature_rel"))
                cfg.tol.quadrature_rel = t.at("quadrature_rel").get<double>();
        }

        if (cfg.scenario != "lemma-suite") {
            if (!j.contains("blocks") || !j.at("blocks").is_array() || j.at("blocks").empty())
                throw input_error("config: 'blocks' must be a non-empty array");
            for (const auto& bj : j.at("blocks")) {
                BlockTemplate t;
                t.kind = bj.at("kind").get<std::string>();
                if (t.kind != "two_runs" && t.kind != "bernoulli" && t.kind != "iid_lattice" &&
                    t.kind != "latent_driver" && t.kind != "general_jump")
                    throw input_error("config: unknown block kind '" + t.kind + "'");
                if (bj.contains("n")) t.n = detail::list_of<int>(bj.at("n"), "n");
                if (bj.contains("p")) t.p = detail::list_of<double>(bj.at("p"), "p");
                if (bj.contains("w")) t.w = detail::list_of<double>(bj.at("w"), "w");
                if (bj.contains("N")) t.copies = detail::list_of<int>(bj.at("N"), "N");
                for (int c : t.copies)
                    if (c < 1) throw input_error("config: N must be >= 1");
                if (bj.contains("pmf")) t.pmf = bj.at("pmf").get<std::vector<double>>();
                if (bj.contains("driver_probs"))
                    t.driver_probs = bj.at("driver_probs").get<std::vector<double>>();
                if (bj.contains("link"))
                    t.link = bj.at("link").get<std::vector<std::vector<long long>>>();
                if (bj.contains("jump")) {
                    for (const auto& a : bj.at("jump")) {
                        if (!a.is_array() || a.size() != 2)
                            throw input_error("config: jump atoms must be [x, m] pairs");
                        t.jump_atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
                    }
                }
                if (t.kind == "iid_lattice" && t.pmf.empty())
                    throw input_error("config: iid_lattice template needs 'pmf'");
                if (t.kind == "latent_driver" && (t.driver_probs.empty() || t.link.empty()))
                    throw input_error("config: latent_driver template needs 'driver_probs' and 'link'");
                if (t.kind == "general_jump" && t.jump_atoms.empty())
                    throw input_error("config: general_jump template needs 'jump'");
                cfg.templates.push_back(std::move(t));
            }
        }

        if (j.contains("variants")) {
            for (const auto& v : j.at("variants")) {
                const std::string name = v.get<std::string>();
                const auto parsed = parse_bound_variant(name);
                if (!parsed) throw input_error("config: unknown bound variant '" + name + "'");
                cfg.variants.push_back(*parsed);
            }
        } else {
            cfg.variants = detail::default_variants(cfg.scenario);
        }
        for (BoundVariant v : cfg.variants)
            for (const auto& t : cfg.templates)
                if (!detail::variant_accepts(v, t.kind))
                    throw input_error(std::string("config: variant '") + to_string(v) +
                                      "' does not apply to block kind '" + t.kind + "'");

        // Scenario / kind compatibility.
        for (const auto& t : cfg.templates) {
            if (cfg.scenario == "tworuns-smoothing" && t.kind != "two_runs")
                throw input_error("config: tworuns-smoothing needs two_runs templates");
            if (cfg.scenario == "poisson-binomial" && t.kind != "bernoulli")
                throw input_error("config: poisson-binomial needs bernoulli templates");
            if (cfg.scenario == "franken" && t.kind != "iid_lattice" && t.kind != "bernoulli")
                throw input_error("config: franken needs iid_lattice or bernoulli templates");
            if (cfg.scenario == "generalized" && t.kind != "general_jump")
                throw input_error("config: generalized needs general_jump templates");
        }
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("config: ") + e.what());
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("config: parse failure in '") + path + "': " + e.what());
    }
    return parse_config(j);
}

// --------------------------------------------------------------------------
// Grid expansion
// --------------------------------------------------------------------------

struct GridPoint {
    long long id = 0;
    // Chosen parameter per template, in template order.
    struct Choice {
        int n = 1;
        double p = 0;
        double w = 1;
        int copies = 1;
    };
    std::vector<Choice> choices;
};

namespace detail {

inline BlockSpec instantiate(const BlockTemplate& t, const GridPoint::Choice& c) {
    if (t.kind == "two_runs") return BlockSpec::two_runs_block(c.p, c.n, c.w);
    if (t.kind == "bernoulli") return BlockSpec::bernoulli_block(c.p, c.n, c.w);
    if (t.kind == "iid_lattice") return BlockSpec::iid_lattice_block(t.pmf, c.n, c.w);
    if (t.kind == "latent_driver")
        return BlockSpec::latent_driver_block(t.driver_probs, t.link, c.n, c.w);
    if (t.kind == "general_jump") {
        SignedMeasure jump = SignedMeasure::from_atoms(t.jump_atoms);
        return BlockSpec::general_jump_block(c.p, jump, c.n, c.w);
    }
    throw input_error("config: unknown block kind '" + t.kind + "'");
}

} // namespace detail

inline std::vector<GridPoint> expand_grid(const ExperimentConfig& cfg) {
    // Odometer over (n, p, w, N) per template, templates in order, last axis
    // fastest; grid ids are the odometer index.
    std::vector<std::size_t> sizes;
    for (const auto& t : cfg.templates) {
        sizes.push_back(t.n.size());
        sizes.push_back(t.p.size());
        sizes.push_back(t.w.size());
        sizes.push_back(t.copies.size());
    }
    long long total = 1;
    for (std::size_t s : sizes) {
        total *= static_cast<long long>(s);
        if (total > 1000000) throw input_error("config: parameter grid exceeds 10^6 points");
    }
    std::vector<GridPoint> grid;
    std::vector<std::size_t> idx(sizes.size(), 0);
    for (long long g = 0; g < total; ++g) {
        GridPoint pt;
        pt.id = g;
        for (std::size_t ti = 0; ti < cfg.templates.size(); ++ti) {
            const auto& t = cfg.templates[ti];
            GridPoint::Choice c;
            c.n = t.n[idx[4 * ti]];
            c.p = t.p[idx[4 * ti + 1]];
            c.w = t.w[idx[4 * ti + 2]];
            c.copies = t.copies[idx[4 * ti + 3]];
            pt.choices.push_back(c);
        }
        grid.push_back(std::move(pt));
        for (std::size_t k = sizes.size(); k-- > 0;) {
            if (++idx[k] < sizes[k]) break;
            idx[k] = 0;
        }
    }
    return grid;
}

/// Blocks for one grid point: N copies of each template instance.
inline std::vector<BlockSpec> blocks_for(const ExperimentConfig& cfg, const GridPoint& pt) {
    std::vector<BlockSpec> blocks;
    for (std::size_t ti = 0; ti < cfg.templates.size(); ++ti) {
        const BlockSpec proto = detail::instantiate(cfg.templates[ti], pt.choices[ti]);
        for (int c = 0; c < pt.choices[ti].copies; ++c) blocks.push_back(proto);
    }
    return blocks;
}

/// Pessimistic atom-count estimate for the exact law of these blocks.
inline double estimate_exact_atoms(const std::vector<BlockSpec>& blocks) {
    auto per_block = [](const BlockSpec& b) -> double {
        switch (b.kind) {
            case BlockKind::iid_lattice:
                return double(b.n) * (double(b.pmf.size()) - 1.0) + 1.0;
            case BlockKind::two_runs: return double(b.n) + 1.0;
            case BlockKind::latent_driver: {
                long long maxf = 0;
                for (const auto& row : b.link)
                    for (long long v : row) maxf = std::max(maxf, v);
                return double(b.n) * double(maxf) + 1.0;
            }
            case BlockKind::general_jump: {
                // multisets of size <= n over (atoms + idle) symbols:
                // C(n + j, j), accumulated over the smaller index
                const double j = double(b.jump.size());
                const int k = int(std::min(double(b.n), j));
                double est = 1.0;
                for (int i = 1; i <= k; ++i) {
                    est *= (double(b.n) + j - i + 1.0) / i;
                    if (est > 1e18) return 1e18;
                }
                return est;
            }
        }
        return 1.0;
    };
    bool all_counting = true;
    bool same_weight = true;
    for (const auto& b : blocks) {
        all_counting = all_counting && b.kind != BlockKind::general_jump;
        same_weight = same_weight && std::abs(std::abs(b.weight) -
                                              std::abs(blocks.front().weight)) < 1e-15;
    }
    if (all_counting && same_weight) {
        double sum = 1.0;
        for (const auto& b : blocks) sum += per_block(b) - 1.0;
        return sum;
    }
    double prod = 1.0;
    for (const auto& b : blocks) {
        prod *= per_block(b);
        if (prod > 1e18) return 1e18;
    }
    return prod;
}

// --------------------------------------------------------------------------
// Reports
// --------------------------------------------------------------------------

struct RunReport {
    std::string scenario;
    std::uint64_t seed = 0;
    std::vector<std::string> header; // numeric CSV columns (after grid_id)
    struct Row {
        long long grid_id = 0;
        std::vector<double> values;
        std::string error;
    };
    std::vector<Row> rows;
    std::vector<ValidationRecord> validations; // lemma-suite only
    int hard_failures = 0;
    int row_errors = 0;
    nlohmann::json summary;
};

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::optional<double> loglog_slope(const std::vector<std::pair<double, double>>& xy) {
    std::vector<std::pair<double, double>> pts;
    std::set<double> xs;
    for (const auto& [x, y] : xy)
        if (x > 0 && y > 0 && std::isfinite(x) && std::isfinite(y)) {
            pts.push_back({std::log(x), std::log(y)});
            xs.insert(x);
        }
    if (pts.size() < 2 || xs.size() < 2) return std::nullopt;
    double mx = 0, my = 0;
    for (const auto& [x, y] : pts) { mx += x; my += y; }
    mx /= pts.size();
    my /= pts.size();
    double sxx = 0, sxy = 0;
    for (const auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx == 0) return std::nullopt;
    return sxy / sxx;
}

/// Measured distance relevant to a variant: second-order variants bound the
/// distance to the quad-corrected approximant, first-order variants to the
/// plain compound-Poisson one; berry_esseen has no target here.
inline double measured_for(BoundVariant v, double dist_first, double dist_second) {
    switch (v) {
        case BoundVariant::onedep_second:
        case BoundVariant::iid_second:
        case BoundVariant::jump_second:
        case BoundVariant::runs_naive:
        case BoundVariant::runs_joint: return dist_second;
        case BoundVariant::berry_esseen: return std::numeric_limits<double>::quiet_NaN();
        default: return dist_first;
    }
}

} // namespace detail

// --------------------------------------------------------------------------
// Randomized validator suite (lemma-suite scenario / `validate` subcommand)
// --------------------------------------------------------------------------

namespace detail {

struct Rng {
    std::uint64_t s;
    explicit Rng(std::uint64_t seed) : s(seed ? seed : 0x9e3779b97f4a7c15ull) {}
    // splitmix64: stable across platforms
    std::uint64_t next() {
        s += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double u01() { return (next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * u01(); }
    int uniform_int(int a, int b) { return a + int(next() % std::uint64_t(b - a + 1)); }
};

inline SignedMeasure random_distribution(Rng& rng, MeasureOptions opts) {
    const int n_atoms = rng.uniform_int(1, 8);
    const bool lattice = rng.u01() < 0.5;
    std::vector<std::pair<double, double>> atoms;
    std::set<long long> used;
    double total = 0.0;
    for (int i = 0; i < n_atoms; ++i) {
        double x;
        if (lattice) {
            long long k;
            do { k = rng.uniform_int(-4, 4); } while (used.count(k) && used.size() < 9);
            used.insert(k);
            x = double(k);
        } else {
            x = rng.uniform(-3.0, 3.0);
        }
        const double m = 0.05 + rng.u01();
        atoms.push_back({x, m});
        total += m;
    }
    for (auto& a : atoms) a.second /= total;
    return SignedMeasure::from_atoms(atoms, opts);
}

} // namespace detail

struct SuiteCounts {
    int concentration = 100;
    int tv_energy = 100;
    int charfn_decay = 20;
};

inline std::vector<ValidationRecord> run_validator_suite(std::uint64_t seed,
                                                         SuiteCounts counts = {},
                                                         Tolerances tol = {}) {
    detail::Rng rng(seed);
    std::vector<ValidationRecord> records;
    const MeasureOptions mopts = tol.measure_opts();
    const QuadratureOptions qopts = tol.quad_opts();

    const double h_grid[3] = {0.3, 0.7, 1.3};
    const double a_grid[3] = {0.5, 1.1, 2.0};
    for (int i = 0; i < counts.concentration; ++i) {
        const SignedMeasure f = detail::random_distribution(rng, mopts);
        const double h = h_grid[rng.uniform_int(0, 2)];
        const double a = a_grid[rng.uniform_int(0, 2)];
        auto recs = validate_concentration_bounds(f, h, a, qopts, tol.series_tol);
        for (auto& r : recs) records.push_back(std::move(r));
    }

    const double gammas[3] = {0.5, 1.0, 2.0};
    for (int i = 0; i < counts.tv_energy; ++i) {
        std::vector<std::pair<double, double>> atoms;
        for (long long k = -3; k <= 3; ++k)
            if (rng.u01() < 0.7) atoms.push_back({double(k), rng.uniform(-1.0, 1.0)});
        if (atoms.empty()) atoms.push_back({0.0, rng.uniform(-1.0, 1.0)});
        const SignedMeasure m = SignedMeasure::from_atoms(atoms, mopts);
        const double upsilon = rng.uniform(-2.0, 2.0);
        for (double g : gammas) records.push_back(validate_tv_energy(m, g, upsilon, qopts));
    }

    const double w_choices[3] = {1.0, 0.5, 1.4142135623730951};
    for (int i = 0; i < counts.charfn_decay; ++i) {
        const int n = rng.uniform_int(3, 80);
        const double p = rng.uniform(0.01, 0.05);
        const double w = w_choices[rng.uniform_int(0, 2)];
        const BlockSpec b = BlockSpec::two_runs_block(p, n, w);
        auto recs = validate_charfn_decay(b, 400, -3.141592653589793, 3.141592653589793, mopts);
        for (auto& r : recs) records.push_back(std::move(r));
    }
    return records;
}

// --------------------------------------------------------------------------
// Runner
// --------------------------------------------------------------------------

inline RunReport run(const ExperimentConfig& cfg, bool force = false) {
    RunReport rep;
    rep.scenario = cfg.scenario;
    rep.seed = cfg.seed;

    if (cfg.scenario == "lemma-suite") {
        rep.validations = run_validator_suite(cfg.seed, {}, cfg.tol);
        int pass = 0, hard_total = 0;
        std::map<std::string, int> by_check_total, by_check_pass;
        for (const auto& r : rep.validations) {
            by_check_total[r.check]++;
            if (r.pass) { by_check_pass[r.check]++; ++pass; }
            if (r.hard) {
                ++hard_total;
                if (!r.pass) ++rep.hard_failures;
            }
        }
        nlohmann::json checks;
        for (const auto& [name, total] : by_check_total)
            checks[name] = {{"total", total}, {"pass", by_check_pass[name]}};
        rep.summary = {{"scenario", cfg.scenario},
                       {"seed", cfg.seed},
                       {"records", rep.validations.size()},
                       {"pass", pass},
                       {"hard_assertions", hard_total},
                       {"hard_failures", rep.hard_failures},
                       {"checks", std::move(checks)},
                       {"timestamp", std::time(nullptr)}};
        return rep;
    }

    const std::vector<GridPoint> grid = expand_grid(cfg);

    // Header: parameters per template, distances, conditions, variant columns.
    for (std::size_t ti = 0; ti < cfg.templates.size(); ++ti) {
        const std::string p = "t" + std::to_string(ti + 1) + "_";
        rep.header.push_back(p + "n");
        rep.header.push_back(p + "p");
        rep.header.push_back(p + "w");
        rep.header.push_back(p + "N");
    }
    rep.header.push_back("n_total");
    rep.header.push_back("exact_atoms");
    rep.header.push_back("dist_first");
    rep.header.push_back("dist_second");
    rep.header.push_back("cond_pass");
    const bool bernoulli_orders = cfg.scenario == "poisson-binomial";
    if (bernoulli_orders) {
        rep.header.push_back("order_normal");
        rep.header.push_back("order_summand");
        rep.header.push_back("order_min");
    }
    for (BoundVariant v : cfg.variants) {
        const std::string p = to_string(v);
        rep.header.push_back(p + "_q");
        for (std::size_t ti = 0; ti < cfg.templates.size(); ++ti)
            rep.header.push_back(p + "_bt" + std::to_string(ti + 1));
        rep.header.push_back(p + "_total");
        rep.header.push_back(p + "_ratio");
    }

    for (const GridPoint& pt : grid) {
        RunReport::Row row;
        row.grid_id = pt.id;
        row.values.assign(rep.header.size(), std::numeric_limits<double>::quiet_NaN());
        std::size_t col = 0;
        auto put = [&](double v) { row.values[col++] = v; };
        try {
            const std::vector<BlockSpec> blocks = blocks_for(cfg, pt);
            for (const auto& c : pt.choices) {
                put(c.n);
                put(c.p);
                put(c.w);
                put(c.copies);
            }
            double n_total = 0;
            for (const auto& b : blocks) n_total += b.n;
            put(n_total);

            const double est = estimate_exact_atoms(blocks);
            if (est > 1e7 && !force)
                throw resource_error("grid point atom estimate " + detail::fmt17(est) +
                                     " exceeds 10^7 (use --force to override)");

            const MeasureOptions mopts = cfg.tol.measure_opts();
            const SignedMeasure exact = weighted_sum_distribution(blocks, mopts);
            put(double(exact.size()));

            SignedMeasure first, second;
            ConditionFamily family;
            if (cfg.scenario == "tworuns-smoothing") {
                first = approx_poisson(blocks, cfg.tol.series_tol, mopts);
                second = approx_poisson_quad(blocks, cfg.tol.series_tol, mopts);
                family = ConditionFamily::onedep;
            } else if (cfg.scenario == "generalized") {
                first = approx_jump(blocks, 1, cfg.tol.series_tol, mopts);
                second = approx_jump(blocks, 2, cfg.tol.series_tol, mopts);
                family = ConditionFamily::jump;
            } else { // poisson-binomial, franken
                first = approx_poisson(blocks, cfg.tol.series_tol, mopts);
                second = approx_iid_quad(blocks, cfg.tol.series_tol, mopts);
                family = ConditionFamily::iid;
            }
            const double dist_first = kolmogorov_distance(exact, first);
            const double dist_second = kolmogorov_distance(exact, second);
            put(dist_first);
            put(dist_second);

            const ConditionReport cond = check_conditions(family, blocks);
            put(cond.all_pass ? 1.0 : 0.0);

            if (bernoulli_orders) {
                double np = 0, np2 = 0, pmin_form = 0;
                for (const auto& b : blocks) {
                    const double p = b.pmf.size() == 2 ? b.pmf[1] : 0.0;
                    np += b.n * p;
                    np2 += b.n * p * p;
                    pmin_form += p * std::sqrt(double(b.n) * p);
                }
                const double denom = std::sqrt(np);
                put(np > 0 ? 1.0 / denom : std::numeric_limits<double>::quiet_NaN());
                put(np > 0 ? np2 / denom : std::numeric_limits<double>::quiet_NaN());
                put(np > 0 ? pmin_form / denom : std::numeric_limits<double>::quiet_NaN());
            }

            ShapeOptions sopts;
            sopts.h = cfg.fixed_h; // NaN -> half-min-weight inside bound_shape
            sopts.gamma1_reading = cfg.gamma1_reading;
            sopts.series_tol = cfg.tol.series_tol;
            sopts.measure_opts = mopts;

            for (BoundVariant v : cfg.variants) {
                const BoundShape shape = bound_shape(v, blocks, sopts);
                put(shape.smoothing_q);
                // Per-template breakdown sums (blocks are template-ordered).
                std::size_t bi = 0;
                for (std::size_t ti = 0; ti < cfg.templates.size(); ++ti) {
                    double s = 0;
                    for (int c = 0; c < pt.choices[ti].copies; ++c) s += shape.breakdown.at(bi++);
                    put(s);
                }
                put(shape.total);
                const double measured = detail::measured_for(v, dist_first, dist_second);
                put(shape.total > 0 ? measured / shape.total
                                    : std::numeric_limits<double>::quiet_NaN());
            }
        } catch (const std::exception& e) {
            row.error = e.what();
            ++rep.row_errors;
        }
        rep.rows.push_back(std::move(row));
    }

    // Summary: slopes of distances and totals against n_total, ratio spreads,
    // condition pass counts.
    auto col_index = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < rep.header.size(); ++i)
            if (rep.header[i] == name) return i;
        return std::nullopt;
    };
    const auto n_col = col_index("n_total");
    nlohmann::json slopes, ratios;
    auto slope_of = [&](const std::string& name) -> nlohmann::json {
        const auto c = col_index(name);
        if (!c || !n_col) return nullptr;
        std::vector<std::pair<double, double>> xy;
        for (const auto& r : rep.rows)
            if (r.error.empty()) xy.push_back({r.values[*n_col], r.values[*c]});
        const auto s = detail::loglog_slope(xy);
        return s ? nlohmann::json(*s) : nlohmann::json(nullptr);
    };
    slopes["dist_first"] = slope_of("dist_first");
    slopes["dist_second"] = slope_of("dist_second");
    for (BoundVariant v : cfg.variants)
        slopes[std::string(to_string(v)) + "_total"] = slope_of(std::string(to_string(v)) + "_total");
    for (BoundVariant v : cfg.variants) {
        const auto c = col_index(std::string(to_string(v)) + "_ratio");
        double lo = std::numeric_limits<double>::infinity(), hi = 0;
        int n_finite = 0;
        if (c)
            for (const auto& r : rep.rows)
                if (r.error.empty() && std::isfinite(r.values[*c])) {
                    lo = std::min(lo, r.values[*c]);
                    hi = std::max(hi, r.values[*c]);
                    ++n_finite;
                }
        nlohmann::json entry;
        if (n_finite) {
            entry = {{"min", lo}, {"max", hi}, {"max_over_min", lo > 0 ? hi / lo : 0.0}};
        }
        ratios[to_string(v)] = std::move(entry);
    }
    int cond_pass = 0, usable = 0;
    if (const auto c = col_index("cond_pass"))
        for (const auto& r : rep.rows)
            if (r.error.empty()) {
                ++usable;
                if (r.values[*c] == 1.0) ++cond_pass;
            }
    rep.summary = {{"scenario", cfg.scenario},
                   {"seed", cfg.seed},
                   {"rows", rep.rows.size()},
                   {"row_errors", rep.row_errors},
                   {"condition_pass", cond_pass},
                   {"condition_total", usable},
                   {"slopes", std::move(slopes)},
                   {"ratios", std::move(ratios)},
                   {"hard_failures", rep.hard_failures},
                   {"timestamp", std::time(nullptr)}};
    return rep;
}

// --------------------------------------------------------------------------
// Emission
// --------------------------------------------------------------------------

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw input_error("cannot write '" + p.string() + "'");
    out << content;
}

} // namespace detail

inline std::string results_csv(const RunReport& rep) {
    std::string csv;
    if (rep.scenario == "lemma-suite") {
        csv = "idx,check,lhs,rhs,margin,pass,hard\n";
        for (std::size_t i = 0; i < rep.validations.size(); ++i) {
            const auto& r = rep.validations[i];
            csv += std::to_string(i) + "," + r.check + "," + detail::fmt17(r.lhs) + "," +
                   detail::fmt17(r.rhs) + "," + detail::fmt17(r.margin) + "," +
                   (r.pass ? "1" : "0") + "," + (r.hard ? "1" : "0") + "\n";
        }
        return csv;
    }
    csv = "grid_id";
    for (const auto& h : rep.header) csv += "," + h;
    csv += ",error\n";
    for (const auto& row : rep.rows) {
        csv += std::to_string(row.grid_id);
        for (double v : row.values) {
            csv += ",";
            if (std::isfinite(v)) csv += detail::fmt17(v);
        }
        std::string err = row.error;
        for (char& ch : err)
            if (ch == ',' || ch == '\n') ch = ';';
        csv += "," + err + "\n";
    }
    return csv;
}

/// Plot-ready CSVs: a log-log slope figure and a ratio-stability figure (or
/// a margin figure for the lemma suite).  Header-only files when empty.
inline std::map<std::string, std::string> plotdata(const RunReport& rep) {
    std::map<std::string, std::string> files;
    if (rep.scenario == "lemma-suite") {
        std::string csv = "idx,check,margin,pass\n";
        for (std::size_t i = 0; i < rep.validations.size(); ++i) {
            const auto& r = rep.validations[i];
            csv += std::to_string(i) + "," + r.check + "," + detail::fmt17(r.margin) + "," +
                   (r.pass ? "1" : "0") + "\n";
        }
        files["margins.csv"] = std::move(csv);
        return files;
    }
    auto col_index = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < rep.header.size(); ++i)
            if (rep.header[i] == name) return i;
        return std::nullopt;
    };
    std::vector<std::string> log_cols = {"dist_first", "dist_second"};
    std::vector<std::string> ratio_cols;
    for (const auto& h : rep.header) {
        // n_total is the x axis, not a bound column, despite the suffix.
        if (h != "n_total" && h.size() > 6 && h.substr(h.size() - 6) == "_total")
            log_cols.push_back(h);
        if (h.size() > 6 && h.substr(h.size() - 6) == "_ratio") ratio_cols.push_back(h);
    }
    {
        std::string csv = "log_n";
        for (const auto& c : log_cols) csv += ",log_" + c;
        csv += "\n";
        const auto n_col = col_index("n_total");
        for (const auto& row : rep.rows) {
            if (!row.error.empty() || !n_col || !(row.values[*n_col] > 0)) continue;
            csv += detail::fmt17(std::log(row.values[*n_col]));
            for (const auto& c : log_cols) {
                const auto ci = col_index(c);
                csv += ",";
                if (ci && row.values[*ci] > 0) csv += detail::fmt17(std::log(row.values[*ci]));
            }
            csv += "\n";
        }
        files["slope.csv"] = std::move(csv);
    }
    {
        std::string csv = "grid_id";
        for (const auto& c : ratio_cols) csv += "," + c;
        csv += "\n";
        for (const auto& row : rep.rows) {
            if (!row.error.empty()) continue;
            csv += std::to_string(row.grid_id);
            for (const auto& c : ratio_cols) {
                const auto ci = col_index(c);
                csv += ",";
                if (ci && std::isfinite(row.values[*ci])) csv += detail::fmt17(row.values[*ci]);
            }
            csv += "\n";
        }
        files["ratio.csv"] = std::move(csv);
    }
    return files;
}

/// Write results.csv, summary.json and figures/*.csv under out_dir.
inline void write_outputs(const RunReport& rep, const std::string& out_dir) {
    namespace fs = std::filesystem;
    const fs::path root(out_dir);
    fs::create_directories(root / "figures");
    detail::write_file(root / "results.csv", results_csv(rep));
    detail::write_file(root / "summary.json", rep.summary.dump(2) + "\n");
    for (const auto& [name, content] : plotdata(rep))
        detail::write_file(root / "figures" / name, content);
}

} // namespace cpsmooth
