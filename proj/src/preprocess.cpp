#include "reliefscan/preprocess.hpp"

#include <stdexcept>

#include "reliefscan/eval.hpp"
#include "reliefscan/mathutil.hpp"

namespace reliefscan::preprocess {

NormalizedImage normalize_u16(const HeightMap& h) {
    validate(h);
    double zmin = h.z[0], zmax = h.z[0];
    for (double v : h.z) {
        if (is_missing(v))
            throw std::invalid_argument("normalize_u16 requires a fully finite map (inpaint first)");
        zmin = std::min(zmin, v);
        zmax = std::max(zmax, v);
    }

    NormalizedImage img;
    img.width = h.width;
    img.height = h.height;
    img.pitch_um = h.pitch_um;
    img.z_min_um = zmin;
    img.z_max_um = zmax;
    img.u16.resize(h.z.size());

    if (!(zmax > zmin)) {
        img.degenerate_range = true;
        return img;  // all zeros
    }
    double range = zmax - zmin;
    for (size_t i = 0; i < h.z.size(); ++i) {
        double u = clamp01((h.z[i] - zmin) / range);
        img.u16[i] = static_cast<uint16_t>(round_half_away(u * 65535.0));
    }
    return img;
}

MissingnessStats missingness_stats(const HeightMap& raw, const LabelMask& labels) {
    validate(raw);
    if (labels.width != raw.width || labels.height != raw.height)
        throw std::invalid_argument("missingness_stats: dimension mismatch");

    size_t n = raw.z.size();
    size_t missing = 0, ink = 0, missing_in_ink = 0;
    LabelMask missing_mask{raw.width, raw.height, std::vector<uint8_t>(n, 0)};
    for (size_t i = 0; i < n; ++i) {
        bool m = is_missing(raw.z[i]);
        bool k = labels.ink[i] != 0;
        missing += m;
        ink += k;
        missing_in_ink += (m && k);
        missing_mask.ink[i] = m ? 1 : 0;
    }
    size_t papyrus = n - ink;
    MissingnessStats s;
    s.frac_total = static_cast<double>(missing) / static_cast<double>(n);
    s.frac_ink = ink ? static_cast<double>(missing_in_ink) / static_cast<double>(ink) : 0.0;
    s.frac_papyrus =
        papyrus ? static_cast<double>(missing - missing_in_ink) / static_cast<double>(papyrus) : 0.0;
    s.dice_missing_vs_ink = eval::dice(missing_mask, labels);
    return s;
}

}  // namespace reliefscan::preprocess
