#ifndef RELIEFSCAN_TYPES_HPP
#define RELIEFSCAN_TYPES_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace reliefscan {

// Dense 2D grid of surface heights in micrometres, row-major.
// NaN marks a missing (non-finite on ingestion) pixel; every other entry is finite.
struct HeightMap {
    int width = 0;
    int height = 0;
    double pitch_um = 0.0;
    std::vector<double> z;
    std::map<std::string, std::string> meta;

    double at(int x, int y) const { return z[static_cast<size_t>(y) * width + x]; }
    double& at(int x, int y) { return z[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return z.size(); }
};

// Throws std::invalid_argument on a malformed map (empty dims, bad pitch, size mismatch).
void validate(const HeightMap& h);

inline bool is_missing(double v) { return !std::isfinite(v); }
inline double missing_value() { return std::numeric_limits<double>::quiet_NaN(); }

// true = measured (finite) pixel.
struct ValidityMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> ok;
};

// true = ink pixel.
struct LabelMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> ink;

    bool at(int x, int y) const { return ink[static_cast<size_t>(y) * width + x] != 0; }
    size_t count_ink() const;
};

struct ManifestEntry {
    std::string sample_id;
    std::string papyrus_id;
    std::string letter;
    std::filesystem::path heightmap_path;
    std::filesystem::path label_path;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    int format_version = 1;

    std::vector<std::string> papyrus_ids() const;  // unique, in first-seen order
};

// Per-sample normalized image: u16 = round_half_away(clamp((z - z_min)/(z_max - z_min), 0, 1) * 65535).
struct NormalizedImage {
    int width = 0;
    int height = 0;
    double pitch_um = 0.0;
    std::vector<uint16_t> u16;
    double z_min_um = 0.0;
    double z_max_um = 0.0;
    bool degenerate_range = false;  // z_max == z_min; all u16 forced to 0

    uint16_t at(int x, int y) const { return u16[static_cast<size_t>(y) * width + x]; }
};

struct PredictionMask {
    int width = 0;
    int height = 0;
    std::vector<float> prob;     // per-pixel ink probability
    std::vector<uint8_t> ink;    // prob >= 0.5

    LabelMask as_labels() const { return LabelMask{width, height, ink}; }
};

}  // namespace reliefscan

#endif
