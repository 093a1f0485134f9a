#ifndef RELIEFSCAN_MATHUTIL_HPP
#define RELIEFSCAN_MATHUTIL_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace reliefscan {

// Percentile by linear interpolation between closest ranks: position (n-1)*q/100
// on the ascending-sorted data. Shared by the inpainting robust scaling and the
// statistics summaries.
inline double percentile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("percentile of empty vector");
    if (q <= 0.0) return sorted.front();
    if (q >= 100.0) return sorted.back();
    double pos = (static_cast<double>(sorted.size()) - 1.0) * q / 100.0;
    size_t i = static_cast<size_t>(pos);
    double frac = pos - static_cast<double>(i);
    if (i + 1 >= sorted.size()) return sorted.back();
    return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
}

inline double percentile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    return percentile_sorted(values, q);
}

// Quantization rounding rule used throughout: half away from zero.
// std::round implements exactly this for finite arguments.
inline double round_half_away(double v) { return std::round(v); }

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace reliefscan

#endif
