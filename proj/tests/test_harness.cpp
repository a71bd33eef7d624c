// Tests for the experiment harness: config parsing, grid expansion, the
// atom-count guardrail, the runner's CSV/JSON artifacts and the randomized
// validator suite.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <cpsmooth/harness.hpp>

using namespace cpsmooth;
using nlohmann::json;

namespace {

std::size_t col(const RunReport& rep, const std::string& name) {
    for (std::size_t i = 0; i < rep.header.size(); ++i)
        if (rep.header[i] == name) return i;
    FAIL("missing column " << name);
    return 0;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

const char* tworuns_cfg = R"({
    "schema_version": 1,
    "scenario": "tworuns-smoothing",
    "blocks": [{"kind": "two_runs", "n": [10, 20], "p": 0.05, "w": 1.0, "N": 2}]
})";

} // namespace

TEST_CASE("experiment config parsing", "[harness][config]") {
    SECTION("minimal config fills defaults") {
        const auto cfg = parse_config(json::parse(tworuns_cfg));
        REQUIRE(cfg.scenario == "tworuns-smoothing");
        REQUIRE(cfg.templates.size() == 1);
        REQUIRE(cfg.templates[0].n == std::vector<int>{10, 20});
        REQUIRE(cfg.templates[0].p == std::vector<double>{0.05});
        REQUIRE(cfg.templates[0].copies == std::vector<int>{2});
        REQUIRE(cfg.seed == 7);
        REQUIRE(cfg.output == "out");
        REQUIRE(std::isnan(cfg.fixed_h));
        REQUIRE(cfg.gamma1_reading == Gamma1Reading::per_block);
        // default variant set for the scenario
        REQUIRE(cfg.variants == std::vector<BoundVariant>{
                                    BoundVariant::onedep_first, BoundVariant::onedep_second,
                                    BoundVariant::runs_naive, BoundVariant::runs_joint});
    }

    SECTION("explicit fields override defaults") {
        auto j = json::parse(tworuns_cfg);
        j["seed"] = 99;
        j["output"] = "elsewhere";
        j["h_policy"] = 0.25;
        j["gamma1_reading"] = "global";
        j["variants"] = {"onedep_second"};
        j["tolerances"] = {{"series_tol", 1e-10}, {"quadrature_rel", 1e-5}};
        const auto cfg = parse_config(j);
        REQUIRE(cfg.seed == 99);
        REQUIRE(cfg.output == "elsewhere");
        REQUIRE(cfg.fixed_h == 0.25);
        REQUIRE(cfg.gamma1_reading == Gamma1Reading::global);
        REQUIRE(cfg.variants == std::vector<BoundVariant>{BoundVariant::onedep_second});
        REQUIRE(cfg.tol.series_tol == 1e-10);
        REQUIRE(cfg.tol.quadrature_rel == 1e-5);
        REQUIRE(cfg.tol.merge_rel == 1e-9); // untouched default

        j["h_policy"] = "half-min-weight";
        REQUIRE(std::isnan(parse_config(j).fixed_h));
    }

    SECTION("jump templates parse atom pairs") {
        const auto j = json::parse(R"({
            "schema_version": 1,
            "scenario": "generalized",
            "blocks": [{"kind": "general_jump", "n": 4, "p": 0.3, "w": 1.0,
                        "jump": [[1.0, 0.5], [2.0, 0.5]]}]
        })");
        const auto cfg = parse_config(j);
        REQUIRE(cfg.templates[0].jump_atoms.size() == 2);
        REQUIRE(cfg.templates[0].jump_atoms[1].first == 2.0);
        REQUIRE(cfg.variants == std::vector<BoundVariant>{BoundVariant::jump_first,
                                                          BoundVariant::jump_second});
    }

    SECTION("invalid configs are rejected as input errors") {
        auto parse_str = [](const char* s) { return parse_config(json::parse(s)); };
        // missing / unsupported schema version
        REQUIRE_THROWS_AS(parse_str(R"({"scenario": "lemma-suite"})"), input_error);
        REQUIRE_THROWS_AS(parse_str(R"({"schema_version": 2, "scenario": "lemma-suite"})"),
                          input_error);
        // wrong field type lands in the same error category
        REQUIRE_THROWS_AS(parse_str(R"({"schema_version": "one", "scenario": "lemma-suite"})"),
                          input_error);
        REQUIRE_THROWS_AS(parse_str(R"({"schema_version": 1, "scenario": "unknown"})"),
                          input_error);
        // non-lemma scenarios need blocks
        REQUIRE_THROWS_AS(parse_str(R"({"schema_version": 1, "scenario": "franken"})"),
                          input_error);
        REQUIRE_THROWS_AS(
            parse_str(R"({"schema_version": 1, "scenario": "franken", "blocks": []})"),
            input_error);

        auto base = json::parse(tworuns_cfg);
        auto bad = base;
        bad["blocks"][0]["kind"] = "mystery";
        REQUIRE_THROWS_AS(parse_config(bad), input_error);
        bad = base;
        bad["blocks"][0]["N"] = 0;
        REQUIRE_THROWS_AS(parse_config(bad), input_error);
        bad = base;
        bad["variants"] = {"not_a_variant"};
        REQUIRE_THROWS_AS(parse_config(bad), input_error);
        bad = base;
        bad["variants"] = {"bernoulli_min"}; // needs Bernoulli blocks
        REQUIRE_THROWS_AS(parse_config(bad), input_error);
        bad = base;
        bad["blocks"][0]["kind"] = "bernoulli"; // scenario needs two_runs
        REQUIRE_THROWS_AS(parse_config(bad), input_error);
        bad = base;
        bad["h_policy"] = 0.0;
        REQUIRE_THROWS_AS(parse_config(bad), input_error);
        bad = base;
        bad["h_policy"] = "maximal";
        REQUIRE_THROWS_AS(parse_config(bad), input_error);
        bad = base;
        bad["gamma1_reading"] = "sideways";
        REQUIRE_THROWS_AS(parse_config(bad), input_error);

        // missing per-kind payloads
        REQUIRE_THROWS_AS(parse_str(R"({"schema_version": 1, "scenario": "franken",
            "blocks": [{"kind": "iid_lattice", "n": 5}]})"),
                          input_error);
        REQUIRE_THROWS_AS(parse_str(R"({"schema_version": 1, "scenario": "generalized",
            "blocks": [{"kind": "general_jump", "n": 5, "p": 0.2}]})"),
                          input_error);
        REQUIRE_THROWS_AS(parse_str(R"({"schema_version": 1, "scenario": "generalized",
            "blocks": [{"kind": "general_jump", "n": 5, "p": 0.2, "jump": [[1.0]]}]})"),
                          input_error);
    }

    SECTION("load_config reads files and reports parse failures") {
        namespace fs = std::filesystem;
        const fs::path dir = fs::temp_directory_path() / "cpsmooth_cfg_test";
        fs::create_directories(dir);
        const fs::path good = dir / "good.json";
        std::ofstream(good) << tworuns_cfg;
        REQUIRE(load_config(good.string()).scenario == "tworuns-smoothing");

        const fs::path broken = dir / "broken.json";
        std::ofstream(broken) << "{ not json";
        REQUIRE_THROWS_AS(load_config(broken.string()), input_error);
        REQUIRE_THROWS_AS(load_config((dir / "absent.json").string()), input_error);
    }
}

TEST_CASE("grid expansion", "[harness][grid]") {
    SECTION("odometer order: later axes vary fastest") {
        const auto cfg = parse_config(json::parse(R"({
            "schema_version": 1, "scenario": "tworuns-smoothing",
            "blocks": [{"kind": "two_runs", "n": [10, 20], "p": 0.05, "w": 1.0, "N": [1, 2]}]
        })"));
        const auto grid = expand_grid(cfg);
        REQUIRE(grid.size() == 4);
        // (n, N) in order: (10,1), (10,2), (20,1), (20,2)
        REQUIRE(grid[0].id == 0);
        REQUIRE(grid[0].choices[0].n == 10);
        REQUIRE(grid[0].choices[0].copies == 1);
        REQUIRE(grid[1].choices[0].n == 10);
        REQUIRE(grid[1].choices[0].copies == 2);
        REQUIRE(grid[2].choices[0].n == 20);
        REQUIRE(grid[2].choices[0].copies == 1);
        REQUIRE(grid[3].choices[0].n == 20);
        REQUIRE(grid[3].choices[0].copies == 2);
    }

    SECTION("templates iterate with the last template fastest") {
        const auto cfg = parse_config(json::parse(R"({
            "schema_version": 1, "scenario": "tworuns-smoothing",
            "blocks": [{"kind": "two_runs", "n": [10, 20], "p": 0.05},
                       {"kind": "two_runs", "n": [30, 40], "p": 0.05}]
        })"));
        const auto grid = expand_grid(cfg);
        REQUIRE(grid.size() == 4);
        REQUIRE(grid[0].choices[0].n == 10);
        REQUIRE(grid[0].choices[1].n == 30);
        REQUIRE(grid[1].choices[0].n == 10);
        REQUIRE(grid[1].choices[1].n == 40);
        REQUIRE(grid[2].choices[0].n == 20);
        REQUIRE(grid[2].choices[1].n == 30);
    }

    SECTION("blocks_for replicates each template N times") {
        const auto cfg = parse_config(json::parse(tworuns_cfg));
        const auto grid = expand_grid(cfg);
        const auto blocks = blocks_for(cfg, grid[0]);
        REQUIRE(blocks.size() == 2);
        REQUIRE(blocks[0].n == 10);
        REQUIRE(blocks[1].n == 10);
        REQUIRE(blocks[0].kind == BlockKind::two_runs);
    }

    SECTION("oversized grids are rejected up front") {
        json j = json::parse(R"({"schema_version": 1, "scenario": "tworuns-smoothing",
                                 "blocks": [{"kind": "two_runs"}]})");
        json ns = json::array(), ps = json::array(), ws = json::array();
        for (int i = 0; i < 101; ++i) {
            ns.push_back(10 + i);
            ps.push_back(0.01 + 1e-5 * i);
            ws.push_back(1.0 + 1e-3 * i);
        }
        j["blocks"][0]["n"] = ns;
        j["blocks"][0]["p"] = ps;
        j["blocks"][0]["w"] = ws; // 101^3 > 10^6 grid points
        const auto cfg = parse_config(j);
        REQUIRE_THROWS_AS(expand_grid(cfg), input_error);
    }
}

TEST_CASE("exact-law size estimate", "[harness][grid]") {
    SECTION("counting blocks with one common |weight| add supports") {
        const std::vector<BlockSpec> same{BlockSpec::two_runs_block(0.05, 100, 1.0),
                                          BlockSpec::two_runs_block(0.05, 100, -1.0)};
        REQUIRE(estimate_exact_atoms(same) == 201.0);
    }

    SECTION("distinct weights multiply supports") {
        const std::vector<BlockSpec> mixed{BlockSpec::two_runs_block(0.05, 100, 1.0),
                                           BlockSpec::two_runs_block(0.05, 100, std::sqrt(2.0))};
        REQUIRE(estimate_exact_atoms(mixed) == 101.0 * 101.0);
    }

    SECTION("lattice pmf width scales the per-block count") {
        const std::vector<BlockSpec> iid{BlockSpec::iid_lattice_block({0.7, 0.2, 0.1}, 6, 1.0)};
        REQUIRE(estimate_exact_atoms(iid) == 13.0); // 6 * 2 + 1
    }

    SECTION("jump mixtures count multisets") {
        const auto B = SignedMeasure::from_atoms({{1.0, 0.5}, {std::sqrt(2.0), 0.5}});
        const std::vector<BlockSpec> jump{BlockSpec::general_jump_block(0.3, B, 3, 1.0)};
        REQUIRE(estimate_exact_atoms(jump) == 10.0); // C(5, 2)
    }

    SECTION("jump multiset count stays polynomial for large n") {
        const auto B = SignedMeasure::from_atoms({{1.0, 0.5}, {std::sqrt(2.0), 0.5}});
        const std::vector<BlockSpec> jump{BlockSpec::general_jump_block(0.05, B, 80, 1.0)};
        REQUIRE(estimate_exact_atoms(jump) == 3321.0); // C(82, 2)
    }
}

TEST_CASE("experiment run over a two-runs grid", "[harness][run]") {
    const auto cfg = parse_config(json::parse(tworuns_cfg));
    const auto rep = run(cfg);

    SECTION("rows, header and parameter columns") {
        REQUIRE(rep.scenario == "tworuns-smoothing");
        REQUIRE(rep.rows.size() == 2);
        REQUIRE(rep.row_errors == 0);
        // 4 template columns + 5 shared + 4 variants * (q, bt1, total, ratio)
        REQUIRE(rep.header.size() == 25);
        REQUIRE(rep.header[0] == "t1_n");
        REQUIRE(rep.rows[0].values[col(rep, "t1_n")] == 10.0);
        REQUIRE(rep.rows[1].values[col(rep, "t1_n")] == 20.0);
        REQUIRE(rep.rows[0].values[col(rep, "t1_N")] == 2.0);
        REQUIRE(rep.rows[0].values[col(rep, "n_total")] == 20.0);
        REQUIRE(rep.rows[1].values[col(rep, "n_total")] == 40.0);
        // exact_atoms records the size of the computed law after pruning, so
        // it must equal a direct computation with the same tolerances
        for (std::size_t r = 0; r < 2; ++r) {
            const int n = r == 0 ? 10 : 20;
            const auto block = BlockSpec::two_runs_block(0.05, n, 1.0);
            const auto law =
                weighted_sum_distribution({block, block}, cfg.tol.measure_opts());
            REQUIRE(rep.rows[r].values[col(rep, "exact_atoms")] == double(law.size()));
            // ... and stay within the un-pruned support 0..2n
            REQUIRE(rep.rows[r].values[col(rep, "exact_atoms")] <= 2.0 * n + 1.0);
            REQUIRE(rep.rows[r].values[col(rep, "exact_atoms")] >= 2.0);
        }
    }

    SECTION("distances, conditions and bound columns are populated") {
        for (const auto& row : rep.rows) {
            REQUIRE(row.error.empty());
            REQUIRE(row.values[col(rep, "dist_first")] > 0.0);
            REQUIRE(row.values[col(rep, "dist_second")] > 0.0);
            REQUIRE(row.values[col(rep, "cond_pass")] == 1.0);
            for (const char* v : {"onedep_first", "onedep_second", "runs_naive", "runs_joint"}) {
                const std::string name(v);
                const double q = row.values[col(rep, name + "_q")];
                const double bt1 = row.values[col(rep, name + "_bt1")];
                const double total = row.values[col(rep, name + "_total")];
                REQUIRE(q > 0.0);
                REQUIRE(q <= 1.0);
                // factorization invariant: total = q * sum of per-template sums
                REQUIRE(std::abs(total - q * bt1) <= 1e-12 * std::max(1.0, std::abs(total)));
            }
            // ratio columns divide the right measured distance by the total
            const double naive_ratio = row.values[col(rep, "runs_naive_ratio")];
            const double naive_total = row.values[col(rep, "runs_naive_total")];
            REQUIRE(naive_ratio * naive_total ==
                    Catch::Approx(row.values[col(rep, "dist_second")]).epsilon(1e-12));
            const double first_ratio = row.values[col(rep, "onedep_first_ratio")];
            const double first_total = row.values[col(rep, "onedep_first_total")];
            REQUIRE(first_ratio * first_total ==
                    Catch::Approx(row.values[col(rep, "dist_first")]).epsilon(1e-12));
        }
    }

    SECTION("summary aggregates slopes, ratios and condition counts") {
        REQUIRE(rep.summary.at("rows") == 2);
        REQUIRE(rep.summary.at("row_errors") == 0);
        REQUIRE(rep.summary.at("condition_pass") == 2);
        REQUIRE(rep.summary.at("condition_total") == 2);
        REQUIRE(rep.summary.at("slopes").at("dist_first").is_number());
        REQUIRE(rep.summary.at("slopes").at("runs_naive_total").is_number());
        // runs_naive total scales like p / sqrt(n): slope -1/2 in n
        REQUIRE(rep.summary.at("slopes").at("runs_naive_total").get<double>() ==
                Catch::Approx(-0.5).margin(1e-9));
        REQUIRE(rep.summary.at("ratios").at("onedep_second").contains("min"));
        REQUIRE(rep.summary.contains("timestamp"));
        REQUIRE(rep.hard_failures == 0);
    }

    SECTION("re-running the same config reproduces the CSV byte for byte") {
        const auto rep2 = run(cfg);
        REQUIRE(results_csv(rep) == results_csv(rep2));
    }
}

TEST_CASE("atom-count guardrail aborts only the offending grid point", "[harness][run]") {
    const auto cfg = parse_config(json::parse(R"({
        "schema_version": 1,
        "scenario": "tworuns-smoothing",
        "blocks": [{"kind": "two_runs", "n": 10, "p": 0.05, "w": 1.0},
                   {"kind": "two_runs", "n": [10, 2000000], "p": 0.05,
                    "w": 1.4142135623730951}]
    })"));
    const auto rep = run(cfg);
    REQUIRE(rep.rows.size() == 2);
    REQUIRE(rep.row_errors == 1);
    REQUIRE(rep.rows[0].error.empty());
    REQUIRE(rep.rows[0].values[col(rep, "dist_first")] > 0.0);
    REQUIRE(rep.rows[1].error.find("10^7") != std::string::npos);
    REQUIRE(rep.rows[1].error.find("--force") != std::string::npos);
    REQUIRE(rep.summary.at("row_errors") == 1);

    // the failed row still appears in the CSV, with its message sanitized
    const std::string csv = results_csv(rep);
    REQUIRE(csv.find("--force") != std::string::npos);
}

TEST_CASE("bernoulli scenario emits the classical order columns", "[harness][run]") {
    const auto cfg = parse_config(json::parse(R"({
        "schema_version": 1,
        "scenario": "poisson-binomial",
        "blocks": [{"kind": "bernoulli", "n": 50, "p": 0.1, "w": 1.0}]
    })"));
    const auto rep = run(cfg);
    REQUIRE(rep.rows.size() == 1);
    REQUIRE(rep.rows[0].error.empty());
    const auto& row = rep.rows[0];
    // 1/sqrt(np), sum np^2/sqrt(np), sum p sqrt(np)/sqrt(np) at n=50, p=0.1
    REQUIRE(row.values[col(rep, "order_normal")] ==
            Catch::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-12));
    REQUIRE(row.values[col(rep, "order_summand")] ==
            Catch::Approx(0.5 / std::sqrt(5.0)).epsilon(1e-12));
    REQUIRE(row.values[col(rep, "order_min")] == Catch::Approx(0.1).epsilon(1e-12));
    REQUIRE(row.values[col(rep, "bernoulli_min_total")] == Catch::Approx(0.1).epsilon(1e-12));

    // berry_esseen has no measured counterpart: its ratio is blank in the CSV
    REQUIRE(std::isnan(row.values[col(rep, "berry_esseen_ratio")]));
    const std::string csv = results_csv(rep);
    std::stringstream ss(csv);
    std::string header_line, data_line;
    std::getline(ss, header_line);
    std::getline(ss, data_line);
    const auto headers = split_line(header_line);
    const auto cells = split_line(data_line);
    REQUIRE(headers.size() == cells.size());
    for (std::size_t i = 0; i < headers.size(); ++i)
        if (headers[i] == "berry_esseen_ratio") REQUIRE(cells[i].empty());
}

TEST_CASE("validator suite determinism", "[harness][validators]") {
    SuiteCounts counts;
    counts.concentration = 5;
    counts.tv_energy = 5;
    counts.charfn_decay = 2;

    const auto a = run_validator_suite(8, counts);
    REQUIRE(a.size() == 5 * 4 + 5 * 3 + 2 * 3);

    SECTION("record mix matches the requested counts") {
        std::map<std::string, int> tally;
        for (const auto& r : a) tally[r.check]++;
        REQUIRE(tally["q_charfn_integral"] == 5);
        REQUIRE(tally["q_window_ratio"] == 5);
        REQUIRE(tally["q_cp_tail"] == 5);
        REQUIRE(tally["charfn_reverse"] == 5);
        REQUIRE(tally["tv_energy"] == 15);
        REQUIRE(tally["charfn_decay_exact"] == 2);
        REQUIRE(tally["charfn_decay_quad"] == 2);
        REQUIRE(tally["charfn_decay_poisson"] == 2);
    }

    SECTION("hard records pass on seeded instances") {
        for (const auto& r : a) {
            INFO(r.check << " lhs=" << r.lhs << " rhs=" << r.rhs);
            if (r.hard) REQUIRE(r.pass);
        }
    }

    SECTION("same seed reproduces records exactly; new seed changes them") {
        const auto b = run_validator_suite(8, counts);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            REQUIRE(a[i].check == b[i].check);
            REQUIRE(a[i].lhs == b[i].lhs);
            REQUIRE(a[i].rhs == b[i].rhs);
            REQUIRE(a[i].margin == b[i].margin);
        }
        const auto c = run_validator_suite(9, counts);
        bool any_diff = false;
        for (std::size_t i = 0; i < std::min(a.size(), c.size()); ++i)
            any_diff = any_diff || a[i].lhs != c[i].lhs || a[i].rhs != c[i].rhs;
        REQUIRE(any_diff);
    }
}

TEST_CASE("lemma-suite scenario", "[harness][run]") {
    const auto cfg = parse_config(json::parse(
        R"({"schema_version": 1, "scenario": "lemma-suite", "seed": 11})"));
    const auto rep = run(cfg);
    // 100 concentration instances x 4 records, 100 energy x 3, 20 decay x 3
    REQUIRE(rep.validations.size() == 760);
    REQUIRE(rep.hard_failures == 0);
    REQUIRE(rep.summary.at("records") == 760);
    REQUIRE(rep.summary.at("pass") == 760);
    REQUIRE(rep.summary.at("checks").at("tv_energy").at("total") == 300);
    REQUIRE(rep.summary.at("checks").at("q_charfn_integral").at("pass") == 100);

    const std::string csv = results_csv(rep);
    REQUIRE(csv.rfind("idx,check,lhs,rhs,margin,pass,hard\n", 0) == 0);

    const auto figs = plotdata(rep);
    REQUIRE(figs.size() == 1);
    REQUIRE(figs.count("margins.csv") == 1);
    REQUIRE(figs.at("margins.csv").rfind("idx,check,margin,pass\n", 0) == 0);
}

TEST_CASE("csv formatting and figure files", "[harness][io]") {
    SECTION("doubles round-trip through the CSV formatter") {
        for (double v : {0.1, 1.0 / 3.0, std::sqrt(2.0), 6.02e23, 1e-300, 123456789.123456789,
                         2.2250738585072014e-308, -0.75}) {
            const std::string s = cpsmooth::detail::fmt17(v);
            REQUIRE(std::strtod(s.c_str(), nullptr) == v);
        }
    }

    SECTION("figure files carry slope and ratio columns") {
        const auto rep = run(parse_config(json::parse(tworuns_cfg)));
        const auto figs = plotdata(rep);
        REQUIRE(figs.count("slope.csv") == 1);
        REQUIRE(figs.count("ratio.csv") == 1);
        const std::string& slope = figs.at("slope.csv");
        REQUIRE(slope.rfind("log_n,log_dist_first,log_dist_second,log_onedep_first_total,"
                            "log_onedep_second_total,log_runs_naive_total,log_runs_joint_total\n",
                            0) == 0);
        REQUIRE(std::count(slope.begin(), slope.end(), '\n') == 3); // header + 2 rows
        const std::string& ratio = figs.at("ratio.csv");
        REQUIRE(ratio.rfind("grid_id,onedep_first_ratio,onedep_second_ratio,runs_naive_ratio,"
                            "runs_joint_ratio\n",
                            0) == 0);
    }

    SECTION("an empty report produces header-only figures") {
        RunReport rep;
        rep.scenario = "tworuns-smoothing";
        const auto figs = plotdata(rep);
        REQUIRE(figs.at("slope.csv") == "log_n,log_dist_first,log_dist_second\n");
        REQUIRE(figs.at("ratio.csv") == "grid_id\n");
        REQUIRE(results_csv(rep) == "grid_id,error\n");
    }

    SECTION("write_outputs lays out the artifact directory") {
        namespace fs = std::filesystem;
        const fs::path dir = fs::temp_directory_path() / "cpsmooth_harness_out";
        fs::remove_all(dir);

        const auto cfg = parse_config(json::parse(tworuns_cfg));
        const auto rep = run(cfg);
        write_outputs(rep, dir.string());
        REQUIRE(fs::exists(dir / "results.csv"));
        REQUIRE(fs::exists(dir / "summary.json"));
        REQUIRE(fs::exists(dir / "figures" / "slope.csv"));
        REQUIRE(fs::exists(dir / "figures" / "ratio.csv"));

        const auto summary = json::parse(slurp(dir / "summary.json"));
        REQUIRE(summary.at("scenario") == "tworuns-smoothing");
        REQUIRE(summary.contains("timestamp"));

        // a second, independent run writes the identical results.csv
        const fs::path dir2 = fs::temp_directory_path() / "cpsmooth_harness_out2";
        fs::remove_all(dir2);
        write_outputs(run(cfg), dir2.string());
        REQUIRE(slurp(dir / "results.csv") == slurp(dir2 / "results.csv"));
        REQUIRE(slurp(dir / "figures" / "slope.csv") == slurp(dir2 / "figures" / "slope.csv"));
    }
}
