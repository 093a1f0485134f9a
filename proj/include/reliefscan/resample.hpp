#ifndef RELIEFSCAN_RESAMPLE_HPP
#define RELIEFSCAN_RESAMPLE_HPP

#include <vector>

#include "reliefscan/types.hpp"

namespace reliefscan::resample {

// Kernel sizes and the lateral pixel pitches they produce from the native grid.
struct PitchLadder {
    std::vector<int> kernels;
    std::vector<double> pitches_um;

    // n ∈ {1,2,3,4,6,8,10,16,32} over a 0.34 µm native pitch.
    static PitchLadder default_ladder(double native_pitch_um = 0.34);
    static PitchLadder from_kernels(const std::vector<int>& kernels,
                                    double native_pitch_um = 0.34);
    // Canonical decimal pitch for kernel n: computed as (n * round(100*native)) / 100
    // when the native pitch is an exact hundredth, so 10 * 0.34 µm prints 3.4 and
    // compares equal to the decimal literal.
    static double pitch_for(int n, double native_pitch_um = 0.34);
};

// Mean over n×n blocks; input cropped top-left to the largest multiple of n in each
// dimension; pitch multiplied by n. n = 1 is the identity. Input must be fully finite.
HeightMap block_downsample(const HeightMap& h, int n);

// Pixel-center-aligned bilinear interpolation with edge clamping; targets must be
// at least the source dims.
HeightMap bilinear_upsample(const HeightMap& h, int target_w, int target_h,
                            double target_pitch_um);

// block_downsample(n) then bilinear_upsample back to the cropped native grid.
// Output pitch equals the input (native) pitch. Runs on physical heights, before
// any normalization.
HeightMap degrade_roundtrip(const HeightMap& h, int n);

// z' = (floor(z/Δ) + 0.5)·Δ — uniform bins anchored at 0 µm, represented by their centers.
HeightMap zbin(const HeightMap& h, double delta_um);

// Majority-vote downsampling of a mask over n×n blocks (ink fraction >= 0.5 → ink),
// cropped like block_downsample. Companion for coarse-grid training/evaluation.
LabelMask downsample_mask(const LabelMask& m, int n);

// Top-left crop; target dims must not exceed the mask dims.
LabelMask crop_mask(const LabelMask& m, int target_w, int target_h);

}  // namespace reliefscan::resample

#endif
