#ifndef RELIEFSCAN_CLI_HPP
#define RELIEFSCAN_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace reliefscan::cli {

// Flat key=value run configuration. Unknown keys are rejected; '#' starts a comment.
struct RunConfig {
    std::filesystem::path manifest;
    std::filesystem::path out;
    uint64_t seed = 42;
    std::vector<int> ladder = {1, 2, 3, 4, 6, 8, 10, 16, 32};
    std::vector<std::string> regimes = {"matched", "cross_res", "zbin", "lopo"};
    int n_perm = 9999;

    // training hyperparameters
    double lr = 1e-3;
    int epochs = 80;
    int batch_px = 8192;
    int patience = 8;
    double val_frac = 0.10;
    int augment_copies = 1;
    int max_px_per_sample = 20000;

    // synthetic corpus
    int synth_width = 1024;
    int synth_height = 1024;
    double synth_pitch_um = 0.34;
    double synth_dropout_frac = 0.017;
    int synth_n_per_papyrus = 0;  // 0 = default 5/5/4 layout

    std::string raw_text;  // file bytes as loaded, echoed for provenance

    static RunConfig load(const std::filesystem::path& path);
    static RunConfig parse(const std::string& text, const std::string& origin = "<memory>");

    // canonical key=value rendering of the effective settings
    std::string canonical() const;
};

struct CliOverrides {
    std::optional<uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> regimes;   // comma list
    std::optional<std::string> ladder;    // comma list of kernels
};

void apply_overrides(RunConfig& cfg, const CliOverrides& o);

// Subcommands. Each echoes the configuration into the output directory and prints
// the path of every artifact it writes. Throws on failure.
void cmd_synth(const RunConfig& cfg);
void cmd_run(const RunConfig& cfg);
void cmd_stats(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg);

// argv entry point used by the binary; returns the process exit code.
int main_entry(int argc, const char* const* argv);

}  // namespace reliefscan::cli

#endif
