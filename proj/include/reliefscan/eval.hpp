#ifndef RELIEFSCAN_EVAL_HPP
#define RELIEFSCAN_EVAL_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "reliefscan/preprocess.hpp"
#include "reliefscan/resample.hpp"
#include "reliefscan/segment.hpp"
#include "reliefscan/types.hpp"

namespace reliefscan::eval {

// 2|a∩b| / (|a|+|b|); the both-empty case is defined as 1.0 here and nowhere else.
double dice(const LabelMask& a, const LabelMask& b);

enum class FoldKind { cv5, lopo };

struct FoldPlan {
    FoldKind kind = FoldKind::cv5;
    int n_folds = 0;
    uint64_t seed = 0;
    std::map<std::string, int> assignment;   // sample_id -> fold index
    std::vector<std::string> fold_labels;    // lopo: papyrus ids; cv5: "0".."4"

    int fold_of(const std::string& sample_id) const;
};

// cv5: seeded shuffle then round-robin deal (sizes differ by <= 1).
// lopo: one fold per papyrus, papyri ordered lexicographically.
FoldPlan make_folds(const DatasetManifest& manifest, FoldKind kind, uint64_t seed);

struct ResultRow {
    std::string sample_id;
    std::string papyrus_id;
    std::string regime;  // matched | cross_res | zbin | lopo
    double pitch_um = 0.0;
    double dice = 0.0;
    int fold = 0;
    std::string model_id;
};

struct ResultTable {
    std::vector<ResultRow> rows;
};

void write_results_csv(const ResultTable& t, const std::filesystem::path& path);
ResultTable read_results_csv(const std::filesystem::path& path);

struct ExperimentConfig {
    resample::PitchLadder ladder = resample::PitchLadder::default_ladder();
    segment::TrainHyper hyper{1e-3, 80, 0, 8192, 8, 0.10, 20000, 1};
    uint64_t seed = 42;
    int threads = 0;  // 0 = RELIEFSCAN_THREADS / hardware
};

// Loads a corpus once and runs the experimental regimes over it. Fold models are
// trained at most once per (training pitch, fold) and shared across regimes, so a
// combined run reproduces exactly what the standalone entry points produce.
// Methods are not safe to call concurrently; parallelism lives inside them.
class Engine {
public:
    Engine(const DatasetManifest& manifest, const ExperimentConfig& cfg);
    ~Engine();

    // Separate model per ladder pitch, trained and evaluated at that pitch.
    ResultTable run_matched();
    // Native-pitch models evaluated on degrade-roundtrip inputs at every ladder pitch.
    ResultTable run_cross_res();
    // Matched-pitch models evaluated on z-binned test inputs (Δz = pitch).
    ResultTable run_zbin();
    // Native pitch, train on all papyri but one, test on the held-out papyrus.
    ResultTable run_lopo();

    // Pre-fill missingness statistics, one entry per manifest sample.
    const std::vector<preprocess::MissingnessStats>& missingness() const;
    const FoldPlan& cv_plan() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Standalone entry points; each builds a fresh Engine.
ResultTable run_matched(const DatasetManifest& m, const ExperimentConfig& cfg);
ResultTable run_cross_res(const DatasetManifest& m, const ExperimentConfig& cfg);
ResultTable run_zbin(const DatasetManifest& m, const ExperimentConfig& cfg);
ResultTable run_lopo(const DatasetManifest& m, const ExperimentConfig& cfg);

}  // namespace reliefscan::eval

#endif
