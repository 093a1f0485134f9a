#ifndef RELIEFSCAN_IMAGEOPS_HPP
#define RELIEFSCAN_IMAGEOPS_HPP

#include <cmath>
#include <vector>

namespace reliefscan::img {

// Separable Gaussian blur, kernel truncated at radius ceil(3*sigma), edges clamped.
template <typename T>
void gaussian_blur(const T* src, T* dst, int w, int h, double sigma) {
    int radius = static_cast<int>(std::ceil(3.0 * sigma));
    if (radius < 1 || sigma <= 0.0) {
        std::copy(src, src + static_cast<size_t>(w) * h, dst);
        return;
    }
    std::vector<double> k(radius + 1);
    double sum = 0.0;
    for (int i = 0; i <= radius; ++i) {
        k[i] = std::exp(-0.5 * (static_cast<double>(i) * i) / (sigma * sigma));
        sum += (i == 0) ? k[i] : 2.0 * k[i];
    }
    for (double& v : k) v /= sum;

    std::vector<double> tmp(static_cast<size_t>(w) * h);
    auto clampi = [](int v, int lim) { return v < 0 ? 0 : (v >= lim ? lim - 1 : v); };
    // horizontal
    for (int y = 0; y < h; ++y) {
        const T* row = src + static_cast<size_t>(y) * w;
        double* out = tmp.data() + static_cast<size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = k[0] * row[x];
            for (int i = 1; i <= radius; ++i)
                acc += k[i] * (row[clampi(x - i, w)] + row[clampi(x + i, w)]);
            out[x] = acc;
        }
    }
    // vertical
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = k[0] * tmp[static_cast<size_t>(y) * w + x];
            for (int i = 1; i <= radius; ++i)
                acc += k[i] * (tmp[static_cast<size_t>(clampi(y - i, h)) * w + x] +
                               tmp[static_cast<size_t>(clampi(y + i, h)) * w + x]);
            dst[static_cast<size_t>(y) * w + x] = static_cast<T>(acc);
        }
    }
}

inline int gaussian_support(double sigma) {
    return 2 * static_cast<int>(std::ceil(3.0 * sigma)) + 1;
}

// Zero-padded separable Gaussian blur plus the matching window-weight arrays
// (wx[x] * wy[y] is the in-image kernel mass at (x, y)). Dividing the blurred
// signal by that mass gives border-unbiased local averages.
template <typename T>
void gaussian_blur_zeropad(const T* src, T* dst, int w, int h, double sigma,
                           std::vector<double>* wx_out = nullptr,
                           std::vector<double>* wy_out = nullptr) {
    int radius = static_cast<int>(std::ceil(3.0 * sigma));
    if (radius < 1 || sigma <= 0.0) {
        std::copy(src, src + static_cast<size_t>(w) * h, dst);
        if (wx_out) wx_out->assign(w, 1.0);
        if (wy_out) wy_out->assign(h, 1.0);
        return;
    }
    std::vector<double> k(radius + 1);
    double sum = 0.0;
    for (int i = 0; i <= radius; ++i) {
        k[i] = std::exp(-0.5 * (static_cast<double>(i) * i) / (sigma * sigma));
        sum += (i == 0) ? k[i] : 2.0 * k[i];
    }
    for (double& v : k) v /= sum;

    auto axis_weights = [&](int n) {
        std::vector<double> wgt(n, k[0]);
        for (int x = 0; x < n; ++x) {
            for (int i = 1; i <= radius; ++i) {
                if (x - i >= 0) wgt[x] += k[i];
                if (x + i < n) wgt[x] += k[i];
            }
        }
        return wgt;
    };
    if (wx_out) *wx_out = axis_weights(w);
    if (wy_out) *wy_out = axis_weights(h);

    std::vector<double> tmp(static_cast<size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        const T* row = src + static_cast<size_t>(y) * w;
        double* out = tmp.data() + static_cast<size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = k[0] * row[x];
            for (int i = 1; i <= radius; ++i) {
                if (x - i >= 0) acc += k[i] * row[x - i];
                if (x + i < w) acc += k[i] * row[x + i];
            }
            out[x] = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = k[0] * tmp[static_cast<size_t>(y) * w + x];
            for (int i = 1; i <= radius; ++i) {
                if (y - i >= 0) acc += k[i] * tmp[static_cast<size_t>(y - i) * w + x];
                if (y + i < h) acc += k[i] * tmp[static_cast<size_t>(y + i) * w + x];
            }
            dst[static_cast<size_t>(y) * w + x] = static_cast<T>(acc);
        }
    }
}

}  // namespace reliefscan::img

#endif
