#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "reliefscan/cli.hpp"

namespace reliefscan::cli {

int main_entry(int argc, const char* const* argv) {
    CLI::App app{"reliefscan: morphology-only ink detection toolkit for profilometry heightmaps"};
    app.require_subcommand(1);

    struct SubArgs {
        std::string config;
        CliOverrides over;
        std::string seed_str, out_str, regimes_str, ladder_str;
    };

    auto add_common = [](CLI::App* sub, SubArgs& a) {
        sub->add_option("--config", a.config, "key=value configuration file");
        sub->add_option("--seed", a.seed_str, "experiment seed (overrides config)");
        sub->add_option("--out", a.out_str, "output directory (overrides config)");
        sub->add_option("--regimes", a.regimes_str,
                        "comma list of matched,cross_res,zbin,lopo (overrides config)");
        sub->add_option("--ladder", a.ladder_str,
                        "comma list of downsampling kernels (overrides config)");
    };

    SubArgs synth_args, run_args, stats_args, report_args;
    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus + manifest");
    auto* run = app.add_subcommand("run", "execute the experimental regimes over a manifest");
    auto* stats = app.add_subcommand("stats", "statistics over result tables");
    auto* report = app.add_subcommand("report", "box-plot SVG and markdown summary");
    add_common(synth, synth_args);
    add_common(run, run_args);
    add_common(stats, stats_args);
    add_common(report, report_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    auto dispatch = [&](SubArgs& a, void (*fn)(const RunConfig&)) {
        RunConfig cfg = a.config.empty() ? RunConfig{} : RunConfig::load(a.config);
        if (!a.seed_str.empty()) a.over.seed = std::stoull(a.seed_str);
        if (!a.out_str.empty()) a.over.out = a.out_str;
        if (!a.regimes_str.empty()) a.over.regimes = a.regimes_str;
        if (!a.ladder_str.empty()) a.over.ladder = a.ladder_str;
        apply_overrides(cfg, a.over);
        fn(cfg);
        return 0;
    };

    try {
        if (synth->parsed()) return dispatch(synth_args, &cmd_synth);
        if (run->parsed()) return dispatch(run_args, &cmd_run);
        if (stats->parsed()) return dispatch(stats_args, &cmd_stats);
        if (report->parsed()) return dispatch(report_args, &cmd_report);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace reliefscan::cli
