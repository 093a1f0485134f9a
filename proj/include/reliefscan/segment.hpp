#ifndef RELIEFSCAN_SEGMENT_HPP
#define RELIEFSCAN_SEGMENT_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "reliefscan/types.hpp"

namespace reliefscan::segment {

// Per-pixel topographic features: normalized height plus, per scale, Gaussian-smoothed
// height, gradient magnitude, residual roughness (local std of height minus smoothed),
// and Laplacian. Feature count = 1 + 4 * |scales|.
struct FeatureConfig {
    std::vector<int> scales_px = {1, 2, 4, 8, 16};

    int feature_count() const { return 1 + 4 * static_cast<int>(scales_px.size()); }
    int largest_support() const;

    // Default scales filtered to kernels whose support fits the image; keeps at
    // least scale 1. Coarse-resolution models therefore carry fewer scales.
    static FeatureConfig for_image(int width, int height);
};

// Pixel-major layout: data[pixel * feature_count + feature].
struct FeatureStack {
    int width = 0;
    int height = 0;
    FeatureConfig config;
    std::vector<float> data;

    size_t pixels() const { return static_cast<size_t>(width) * height; }
    const float* row(size_t pixel) const { return data.data() + pixel * config.feature_count(); }
};

FeatureStack extract_features(const NormalizedImage& img, const FeatureConfig& cfg = {});

struct TrainHyper {
    double lr = 1e-3;
    int epochs = 80;
    uint64_t seed = 0;
    int batch_px = 8192;
    int patience = 8;            // early stop after this many epochs without val improvement
    double val_frac = 0.10;      // held-out pixel fraction for the validation loss
    int max_px_per_sample = 0;   // 0 = use every pixel
    int augment_copies = 0;      // augmented variants added per training sample
};

struct TrainMeta {
    uint64_t seed = 0;
    int epochs_run = 0;
    double lr = 0.0;
    double best_val_loss = 0.0;
    std::vector<double> loss_curve;  // mean training loss per epoch
};

// Logistic classifier over standardized features. Standardization statistics are
// fit on training pixels only and travel with the model.
struct SegmenterModel {
    FeatureConfig features;
    std::vector<double> weights;
    double bias = 0.0;
    std::vector<double> feat_mean;
    std::vector<double> feat_std;
    double train_pitch_um = 0.0;
    TrainMeta meta;
};

struct TrainSample {
    const NormalizedImage* img;
    const LabelMask* labels;
};

SegmenterModel train(const std::vector<TrainSample>& samples, const TrainHyper& hyper);

// Flat pixel pool used by the experiment engine (rows already feature-extracted).
struct PixelPool {
    int feature_count = 0;
    size_t rows = 0;
    std::vector<float> x;   // rows * feature_count
    std::vector<uint8_t> y;

    void append(const float* features, uint8_t label);
};

SegmenterModel train_pool(const PixelPool& pool, const FeatureConfig& cfg, double train_pitch_um,
                          const TrainHyper& hyper);

PredictionMask predict(const SegmenterModel& model, const NormalizedImage& img);

// Composite objective: soft-Dice loss (smoothing constant 1) plus mean pixel
// cross-entropy, evaluated on a batch of standardized feature rows. Exposed so the
// analytic gradient can be checked against finite differences.
struct LossGrad {
    double loss = 0.0;
    std::vector<double> dw;
    double db = 0.0;
};

double composite_loss(std::span<const double> w, double b, const double* x,
                      const uint8_t* y, size_t n, size_t f);
LossGrad composite_loss_grad(std::span<const double> w, double b, const double* x,
                             const uint8_t* y, size_t n, size_t f);

// Training-time augmentation: axis flips (p = 0.5 each), 90° rotations,
// multiplicative intensity scaling, and a coarse-grid elastic warp applied
// bilinearly to the image and nearest-neighbor to the labels.
struct AugmentParams {
    bool flips = true;
    bool rotations = true;
    double intensity_lo = 0.9;
    double intensity_hi = 1.1;
    double elastic_amp_px = 0.6;
    int elastic_grid = 5;  // control points per axis

    bool neutral() const {
        return !flips && !rotations && intensity_lo == 1.0 && intensity_hi == 1.0 &&
               elastic_amp_px == 0.0;
    }
};

std::pair<NormalizedImage, LabelMask> augment(const NormalizedImage& img, const LabelMask& labels,
                                              uint64_t seed, const AugmentParams& params = {});

// Augmentation building blocks (exposed for property tests).
NormalizedImage flip_image(const NormalizedImage& in, bool horizontal);
LabelMask flip_mask(const LabelMask& in, bool horizontal);
NormalizedImage rotate90_image(const NormalizedImage& in);
LabelMask rotate90_mask(const LabelMask& in);

// Versioned JSON serialization; weights and statistics round-trip exactly.
void save_model(const SegmenterModel& model, const std::filesystem::path& path);
SegmenterModel load_model(const std::filesystem::path& path);

}  // namespace reliefscan::segment

#endif
