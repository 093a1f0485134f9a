#ifndef RELIEFSCAN_PREPROCESS_HPP
#define RELIEFSCAN_PREPROCESS_HPP

#include "reliefscan/types.hpp"

namespace reliefscan::preprocess {

// m(x) = true iff z(x) is finite.
ValidityMask validity_mask(const HeightMap& h);

// Fills every missing pixel by fast-marching inpainting on a temporary 8-bit map
// built with robust linear scaling (0.5–99.5 percentiles of the finite values),
// then maps filled values back to micrometres. Every originally finite pixel is
// restored bit-exactly. Requires at least one finite pixel and radius_px >= 1.
// Degenerate robust range (p0.5 == p99.5): all missing pixels take that value.
HeightMap inpaint_missing(const HeightMap& h, int radius_px = 3);

// Min-max normalization to [0,1] followed by 16-bit quantization with
// round-half-away-from-zero. Input must be fully finite. A constant map yields
// all zeros with degenerate_range set.
NormalizedImage normalize_u16(const HeightMap& h);

struct MissingnessStats {
    double frac_total = 0.0;      // missing / all pixels
    double frac_ink = 0.0;        // missing / ink pixels (0 when no ink)
    double frac_papyrus = 0.0;    // missing / papyrus pixels (0 when no papyrus)
    double dice_missing_vs_ink = 0.0;
};

// Fractions of non-finite pixels in the raw (pre-fill) map, overall and per class,
// plus Dice overlap between the missingness mask and the ink mask.
MissingnessStats missingness_stats(const HeightMap& raw, const LabelMask& labels);

}  // namespace reliefscan::preprocess

#endif
