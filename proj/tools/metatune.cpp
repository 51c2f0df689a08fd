// metatune command line: run, report, validate.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metatune/config.hpp"
#include "metatune/errors.hpp"
#include "metatune/experiment.hpp"

namespace fs = std::filesystem;
using namespace metatune;

int main(int argc, char** argv) {
    CLI::App app{"metatune: Bayesian hyperparameter optimization for RL agents"};
    app.require_subcommand(1);

    std::string run_config;
    std::uint64_t seed_offset = 0;
    std::string out_dir;
    bool no_timing = false;
    int jobs = 1;
    auto* run = app.add_subcommand("run", "run every optimizer for every seed in a config");
    run->add_option("--config", run_config, "experiment config (JSON)")->required();
    run->add_option("--seed-offset", seed_offset, "added to every seed in the config");
    run->add_option("--out", out_dir, "output root (default: $METATUNE_OUT or ./results)");
    run->add_flag("--no-timing", no_timing, "write wallclock_ms as 0 so reruns are byte-identical");
    run->add_option("--jobs", jobs, "executions to run in parallel")->check(CLI::PositiveNumber);

    std::vector<std::string> report_in;
    std::string report_out;
    auto* rep = app.add_subcommand("report", "aggregate finished executions into comparison tables");
    rep->add_option("--in", report_in, "result directories, searched recursively")->required();
    rep->add_option("--out", report_out, "where to write comparison CSVs (default: first --in)");

    std::string validate_config;
    auto* val = app.add_subcommand("validate", "parse and validate a config");
    val->add_option("--config", validate_config, "experiment config (JSON)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const auto config = load_config(run_config);
            RunOptions opts;
            if (!out_dir.empty()) opts.out_root = fs::path(out_dir);
            opts.seed_offset = seed_offset;
            opts.record_timing = !no_timing;
            opts.jobs = jobs;
            const auto execs = run_experiment(config, opts);
            for (const auto& e : execs)
                std::cout << to_string(e.optimizer) << " seed " << e.seed << ": best " << format_number(e.best_y)
                          << " -> " << e.dir.string() << "\n";
        } else if (*rep) {
            std::vector<fs::path> dirs(report_in.begin(), report_in.end());
            const fs::path out = report_out.empty() ? dirs.front() : fs::path(report_out);
            const auto res = report(dirs, out);
            for (const auto& w : res.warnings) std::cerr << "warning: excluded " << w << "\n";
            if (!res.warnings.empty()) std::cerr << res.warnings.size() << " execution(s) excluded\n";
            std::cout << "aggregated " << res.executions_used << " execution(s)\n"
                      << res.comparison_csv.string() << "\n"
                      << res.long_csv.string() << "\n";
        } else if (*val) {
            const auto config = load_config(validate_config);
            std::cout << "ok: " << config.name << " (" << config.optimizers.size() << " optimizer(s), "
                      << config.seeds.size() << " seed(s), " << config.settings.meta_episodes
                      << " meta-episodes)\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
