// Command-line front end: select | counts | profile | analyze | train | lag | all.

#include <cstdint>
#include <functional>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "meshtrace/config.hpp"
#include "meshtrace/pipeline.hpp"

namespace {

using meshtrace::cli::RunConfig;

struct GlobalOptions {
    std::string config_path;
    std::string out_dir;
    std::string backend;
    std::int64_t seed = -1;
};

RunConfig effective_config(const GlobalOptions& opts) {
    RunConfig cfg = RunConfig::from_json_file(opts.config_path);
    if (!opts.out_dir.empty())
        cfg.out_dir = opts.out_dir;
    if (!opts.backend.empty())
        cfg.backend = opts.backend;
    if (opts.seed >= 0)
        cfg.seed = static_cast<std::uint64_t>(opts.seed);
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trace newly added controlled-vocabulary terms through a literature corpus,"
                 " classify their emergence trends and train emergence predictors."};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand

    GlobalOptions opts;
    app.add_option("--config", opts.config_path, "Run configuration (JSON)")
        ->required();
    app.add_option("--out", opts.out_dir, "Output directory (overrides config)");
    app.add_option("--seed", opts.seed, "Random seed (overrides config)");
    app.add_option("--backend", opts.backend, "Corpus backend (overrides config)")
        ->check(CLI::IsMember({"fixture", "live"}));

    const std::pair<std::string, std::pair<const char*, void (*)(const RunConfig&,
                                                                 meshtrace::corpus::Transport)>>
        commands[] = {
            {"select", {"Apply the term-selection filters and write per-cohort CSVs",
                        meshtrace::cli::cmd_select}},
            {"counts", {"Materialize per-term yearly article counts",
                        meshtrace::cli::cmd_counts}},
            {"profile", {"Write topic characteristic profiles", meshtrace::cli::cmd_profile}},
            {"analyze", {"Descriptive statistics, trends and group tests",
                         meshtrace::cli::cmd_analyze}},
            {"train", {"Forecast sweep, cross-validation and full-data fit",
                       meshtrace::cli::cmd_train}},
            {"lag", {"Clinical-significance time-lag staging", meshtrace::cli::cmd_lag}},
            {"all", {"Run every stage", meshtrace::cli::cmd_all}},
        };

    void (*selected)(const RunConfig&, meshtrace::corpus::Transport) = nullptr;
    for (const auto& [name, spec] : commands) {
        CLI::App* sub = app.add_subcommand(name, spec.first);
        auto fn = spec.second;
        sub->callback([&selected, fn] { selected = fn; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        selected(effective_config(opts), nullptr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
