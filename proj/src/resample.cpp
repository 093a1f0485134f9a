#include "reliefscan/resample.hpp"

#include <cmath>
#include <stdexcept>

namespace reliefscan::resample {

PitchLadder PitchLadder::default_ladder(double native_pitch_um) {
    return from_kernels({1, 2, 3, 4, 6, 8, 10, 16, 32}, native_pitch_um);
}

PitchLadder PitchLadder::from_kernels(const std::vector<int>& kernels, double native_pitch_um) {
    if (kernels.empty()) throw std::invalid_argument("empty pitch ladder");
    PitchLadder l;
    l.kernels = kernels;
    for (int n : kernels) {
        if (n < 1) throw std::invalid_argument("ladder kernel must be >= 1");
        l.pitches_um.push_back(pitch_for(n, native_pitch_um));
    }
    return l;
}

double PitchLadder::pitch_for(int n, double native_pitch_um) {
    double cents = native_pitch_um * 100.0;
    double rounded = std::round(cents);
    if (std::fabs(cents - rounded) < 1e-9 && rounded > 0)
        return (static_cast<double>(n) * rounded) / 100.0;
    return native_pitch_um * static_cast<double>(n);
}

namespace {

void require_finite(const HeightMap& h, const char* op) {
    for (double v : h.z)
        if (is_missing(v)) throw std::invalid_argument(std::string(op) + " requires a fully finite map");
}

}  // namespace

HeightMap block_downsample(const HeightMap& h, int n) {
    validate(h);
    require_finite(h, "block_downsample");
    if (n < 1) throw std::invalid_argument("block_downsample: n must be >= 1");
    if (n > h.width || n > h.height)
        throw std::invalid_argument("block_downsample: kernel larger than image");
    if (n == 1) return h;

    HeightMap out;
    out.width = h.width / n;
    out.height = h.height / n;
    out.pitch_um = h.pitch_um * static_cast<double>(n);
    out.meta = h.meta;
    out.z.resize(static_cast<size_t>(out.width) * out.height);
    const double inv = 1.0 / (static_cast<double>(n) * n);
    for (int oy = 0; oy < out.height; ++oy) {
        for (int ox = 0; ox < out.width; ++ox) {
            double sum = 0.0;
            for (int dy = 0; dy < n; ++dy)
                for (int dx = 0; dx < n; ++dx) sum += h.at(ox * n + dx, oy * n + dy);
            out.at(ox, oy) = sum * inv;
        }
    }
    return out;
}

HeightMap bilinear_upsample(const HeightMap& h, int target_w, int target_h,
                            double target_pitch_um) {
    validate(h);
    require_finite(h, "bilinear_upsample");
    if (target_w < h.width || target_h < h.height)
        throw std::invalid_argument("bilinear_upsample: targets must be >= source dims");
    if (target_w < 1 || target_h < 1)
        throw std::invalid_argument("bilinear_upsample: non-positive target dims");

    HeightMap out;
    out.width = target_w;
    out.height = target_h;
    out.pitch_um = target_pitch_um;
    out.meta = h.meta;
    out.z.resize(static_cast<size_t>(target_w) * target_h);

    const double sx = static_cast<double>(h.width) / target_w;
    const double sy = static_cast<double>(h.height) / target_h;
    auto clampi = [](int v, int lim) { return v < 0 ? 0 : (v >= lim ? lim - 1 : v); };
    for (int y = 0; y < target_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        double wy = fy - y0;
        int y0c = clampi(y0, h.height), y1c = clampi(y0 + 1, h.height);
        for (int x = 0; x < target_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            double wx = fx - x0;
            int x0c = clampi(x0, h.width), x1c = clampi(x0 + 1, h.width);
            double top = h.at(x0c, y0c) * (1.0 - wx) + h.at(x1c, y0c) * wx;
            double bot = h.at(x0c, y1c) * (1.0 - wx) + h.at(x1c, y1c) * wx;
            out.at(x, y) = top * (1.0 - wy) + bot * wy;
        }
    }
    return out;
}

HeightMap degrade_roundtrip(const HeightMap& h, int n) {
    validate(h);
    if (n < 1) throw std::invalid_argument("degrade_roundtrip: n must be >= 1");
    int cw = (h.width / n) * n;
    int ch = (h.height / n) * n;
    if (cw == 0 || ch == 0)
        throw std::invalid_argument("degrade_roundtrip: kernel larger than image");

    if (n == 1) return h;
    HeightMap coarse = block_downsample(h, n);
    HeightMap up = bilinear_upsample(coarse, cw, ch, h.pitch_um);
    return up;
}

HeightMap zbin(const HeightMap& h, double delta_um) {
    validate(h);
    require_finite(h, "zbin");
    if (!(delta_um > 0.0)) throw std::invalid_argument("zbin: delta_um must be > 0");
    HeightMap out = h;
    for (double& v : out.z) v = (std::floor(v / delta_um) + 0.5) * delta_um;
    return out;
}

LabelMask downsample_mask(const LabelMask& m, int n) {
    if (n < 1) throw std::invalid_argument("downsample_mask: n must be >= 1");
    if (n > m.width || n > m.height)
        throw std::invalid_argument("downsample_mask: kernel larger than mask");
    if (n == 1) return m;
    LabelMask out;
    out.width = m.width / n;
    out.height = m.height / n;
    out.ink.resize(static_cast<size_t>(out.width) * out.height);
    const int half = n * n;  // threshold: 2*count >= n*n means fraction >= 0.5
    for (int oy = 0; oy < out.height; ++oy) {
        for (int ox = 0; ox < out.width; ++ox) {
            int count = 0;
            for (int dy = 0; dy < n; ++dy)
                for (int dx = 0; dx < n; ++dx) count += m.at(ox * n + dx, oy * n + dy) ? 1 : 0;
            out.ink[static_cast<size_t>(oy) * out.width + ox] = (2 * count >= half) ? 1 : 0;
        }
    }
    return out;
}

LabelMask crop_mask(const LabelMask& m, int target_w, int target_h) {
    if (target_w > m.width || target_h > m.height || target_w < 1 || target_h < 1)
        throw std::invalid_argument("crop_mask: bad target dims");
    if (target_w == m.width && target_h == m.height) return m;
    LabelMask out;
    out.width = target_w;
    out.height = target_h;
    out.ink.resize(static_cast<size_t>(target_w) * target_h);
    for (int y = 0; y < target_h; ++y)
        for (int x = 0; x < target_w; ++x)
            out.ink[static_cast<size_t>(y) * target_w + x] = m.at(x, y) ? 1 : 0;
    return out;
}

}  // namespace reliefscan::resample
