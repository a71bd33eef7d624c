// Command line front end.
//
//   cpsmooth run      --config cfg.json [--out dir] [--seed n] [--force]
//   cpsmooth validate --suite lemmas [--seed n]
//   cpsmooth shapes   --config cfg.json [--out dir]
//
// Exit codes: 0 all hard assertions passed, 1 a hard assertion failed,
// 2 bad input (config, flags, unreadable files).

#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <cpsmooth/cpsmooth.hpp>

namespace {

using namespace cpsmooth;

int cmd_run(const std::string& config_path, const std::optional<std::string>& out,
            const std::optional<std::uint64_t>& seed, bool force) {
    ExperimentConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    const RunReport rep = run(cfg, force);
    const std::string out_dir = out ? *out : cfg.output;
    write_outputs(rep, out_dir);
    std::printf("scenario %s: %zu rows, %d row errors, %d hard failures -> %s\n",
                rep.scenario.c_str(),
                rep.scenario == "lemma-suite" ? rep.validations.size() : rep.rows.size(),
                rep.row_errors, rep.hard_failures, out_dir.c_str());
    return rep.hard_failures > 0 ? 1 : 0;
}

int cmd_validate(const std::string& suite, std::uint64_t seed) {
    if (suite != "lemmas") throw input_error("unknown suite '" + suite + "' (expected 'lemmas')");
    const auto records = run_validator_suite(seed);
    std::map<std::string, std::pair<int, int>> tally; // check -> (pass, total)
    int hard_failures = 0;
    for (const auto& r : records) {
        auto& [pass, total] = tally[r.check];
        ++total;
        if (r.pass) ++pass;
        if (r.hard && !r.pass) {
            ++hard_failures;
            std::printf("FAIL %s: lhs=%.17g rhs=%.17g margin=%.17g\n", r.check.c_str(), r.lhs,
                        r.rhs, r.margin);
        }
    }
    for (const auto& [name, pt] : tally)
        std::printf("%-22s %4d/%d%s\n", name.c_str(), pt.first, pt.second,
                    pt.first == pt.second ? "" : "  (soft checks may record margins only)");
    std::printf("hard failures: %d\n", hard_failures);
    return hard_failures > 0 ? 1 : 0;
}

int cmd_shapes(const std::string& config_path, const std::optional<std::string>& out) {
    ExperimentConfig cfg = load_config(config_path);
    if (cfg.scenario == "lemma-suite")
        throw input_error("shapes: lemma-suite has no bound shapes; use a distribution scenario");
    const auto grid = expand_grid(cfg);
    std::string csv = "grid_id,n_total,variant,q,total";
    std::size_t max_blocks = 0;
    for (const auto& pt : grid) {
        std::size_t nb = 0;
        for (const auto& c : pt.choices) nb += c.copies;
        max_blocks = std::max(max_blocks, nb);
    }
    for (std::size_t i = 1; i <= max_blocks; ++i) csv += ",b" + std::to_string(i);
    csv += ",error\n";
    char buf[64];
    for (const auto& pt : grid) {
        const auto blocks = blocks_for(cfg, pt);
        double n_total = 0;
        for (const auto& b : blocks) n_total += b.n;
        for (BoundVariant v : cfg.variants) {
            csv += std::to_string(pt.id) + ",";
            std::snprintf(buf, sizeof buf, "%.17g", n_total);
            csv += buf;
            csv += ",";
            csv += to_string(v);
            std::string error;
            try {
                ShapeOptions sopts;
                sopts.h = cfg.fixed_h;
                sopts.gamma1_reading = cfg.gamma1_reading;
                sopts.series_tol = cfg.tol.series_tol;
                sopts.measure_opts = cfg.tol.measure_opts();
                const BoundShape shape = bound_shape(v, blocks, sopts);
                std::snprintf(buf, sizeof buf, ",%.17g", shape.smoothing_q);
                csv += buf;
                std::snprintf(buf, sizeof buf, ",%.17g", shape.total);
                csv += buf;
                for (double b : shape.breakdown) {
                    std::snprintf(buf, sizeof buf, ",%.17g", b);
                    csv += buf;
                }
                for (std::size_t i = shape.breakdown.size(); i < max_blocks; ++i) csv += ",";
            } catch (const std::exception& e) {
                error = e.what();
                for (char& ch : error)
                    if (ch == ',' || ch == '\n') ch = ';';
                csv += ",,";
                for (std::size_t i = 0; i < max_blocks; ++i) csv += ",";
            }
            csv += "," + error + "\n";
        }
    }
    if (out) {
        namespace fs = std::filesystem;
        fs::create_directories(*out);
        std::ofstream f(fs::path(*out) / "shapes.csv", std::ios::binary);
        if (!f) throw input_error("cannot write shapes.csv under '" + *out + "'");
        f << csv;
        std::printf("wrote %s/shapes.csv\n", out->c_str());
    } else {
        std::fputs(csv.c_str(), stdout);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact laws, compound-Poisson approximants and smoothing bounds "
                 "for weighted sums of dependent integer blocks"};
    app.require_subcommand(1);

    std::string config_path, out_dir, suite = "lemmas";
    std::uint64_t seed = 7;
    bool have_out = false, have_seed = false, force = false;

    auto* run_cmd = app.add_subcommand("run", "run an experiment config");
    run_cmd->add_option("--config", config_path, "JSON experiment config")->required();
    auto* run_out = run_cmd->add_option("--out", out_dir, "output directory (overrides config)");
    auto* run_seed = run_cmd->add_option("--seed", seed, "seed override");
    run_cmd->add_flag("--force", force, "ignore the exact-law size guardrail");

    auto* val_cmd = app.add_subcommand("validate", "run the randomized inequality suite");
    val_cmd->add_option("--suite", suite, "suite name (lemmas)")->required();
    val_cmd->add_option("--seed", seed, "suite seed");

    auto* shp_cmd = app.add_subcommand("shapes", "evaluate bound shapes only (no exact laws)");
    shp_cmd->add_option("--config", config_path, "JSON experiment config")->required();
    auto* shp_out = shp_cmd->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
        have_out = run_out->count() > 0 || shp_out->count() > 0;
        have_seed = run_seed->count() > 0;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand("run"))
            return cmd_run(config_path,
                           have_out ? std::optional<std::string>(out_dir) : std::nullopt,
                           have_seed ? std::optional<std::uint64_t>(seed) : std::nullopt, force);
        if (app.got_subcommand("validate")) return cmd_validate(suite, seed);
        if (app.got_subcommand("shapes"))
            return cmd_shapes(config_path,
                              have_out ? std::optional<std::string>(out_dir) : std::nullopt);
    } catch (const input_error& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
