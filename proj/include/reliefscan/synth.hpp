#ifndef RELIEFSCAN_SYNTH_HPP
#define RELIEFSCAN_SYNTH_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "reliefscan/types.hpp"

namespace reliefscan::synth {

struct StrokePoint {
    double x, y;  // unit coordinates, (0,0) top-left
};

struct Glyph {
    std::string name;
    std::vector<std::vector<StrokePoint>> strokes;  // polylines, round caps
};

const std::vector<Glyph>& builtin_glyphs();

// Seeded generator of papyrus-like heightmaps: tilt plane + quadratic bow + two
// orthogonal half-sine fiber layers + multi-octave roughness (valleys and hills down
// to pixel scale), with strokes depressed and smoothed inside the glyph mask, then
// uniform missing-pixel dropout. roughness_rms_um is the RMS of the finest octave;
// octave amplitude doubles with each doubling of wavelength.
struct SynthConfig {
    uint64_t seed = 1;
    int width = 1024;
    int height = 1024;
    double pitch_um = 0.34;
    double fiber_period_um = 42.0;
    double fiber_amp_um = 1.0;
    double tilt_um_per_mm = 35.0;
    double curvature_um_per_mm2 = 100.0;
    double roughness_rms_um = 0.85;
    double ink_depression_um = 0.8;
    double ink_smoothing_factor = 0.45;  // roughness multiplier inside ink, 0..1
    double stroke_width_um = 45.0;
    double dropout_frac = 0.017;
    std::string glyph = "auto";  // builtin glyph name, or "auto" to draw one per seed
};

void validate(const SynthConfig& cfg);

struct SynthSample {
    HeightMap heightmap;
    LabelMask labels;
};

SynthSample generate_sample(const SynthConfig& cfg);

// Same generator with an explicit skeleton instead of a builtin glyph name.
SynthSample generate_sample(const SynthConfig& cfg, const Glyph& glyph);

// Per-papyrus parameter offsets emulating cross-manuscript heterogeneity.
struct PapyrusSpec {
    std::string id;
    int n_samples = 0;  // 0 = use the corpus default
    double fiber_period_scale = 1.0;
    double roughness_scale = 1.0;
    double ink_depression_scale = 1.0;
    double ink_smoothing_override = -1.0;  // < 0 = keep base value
};

// Default three-papyrus layout, 5+5+4 samples; the third papyrus carries weaker
// ink relief so cross-papyrus transfer onto it is measurably harder.
std::vector<PapyrusSpec> default_papyri();

// Writes HMAP/PGM files plus manifest.csv into out_dir and returns the manifest.
// n_per_papyrus overrides any PapyrusSpec with n_samples == 0.
DatasetManifest generate_corpus(const SynthConfig& base, const std::vector<PapyrusSpec>& papyri,
                                const std::filesystem::path& out_dir, int n_per_papyrus = 0);

}  // namespace reliefscan::synth

#endif
