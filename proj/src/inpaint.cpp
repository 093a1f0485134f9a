#include <cmath>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "reliefscan/mathutil.hpp"
#include "reliefscan/preprocess.hpp"

// Fast-marching inpainting after Telea. Fixed constants:
//   - Eikonal update on the 4-neighborhood,
//   - square weighting window of half-width radius_px,
//   - direction/geometric-distance/level-set weights with a 1e-6 guard,
//   - heap ties broken by pixel index,
//   - filled values are plain normalized weighted averages of known neighbors
//     (no gradient extrapolation term), so they stay inside the known 8-bit range.

namespace reliefscan::preprocess {

namespace {

enum Flag : uint8_t { KNOWN = 0, BAND = 1, INSIDE = 2 };

constexpr double kFar = 1e6;
constexpr double kEps = 1e-6;

struct Front {
    int width, height;
    std::vector<uint8_t> flag;
    std::vector<double> dist;

    // min-heap on (distance, pixel index); stale entries skipped lazily
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;

    size_t idx(int x, int y) const { return static_cast<size_t>(y) * width + x; }
    bool inside(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

// Solves the discrete Eikonal |grad T| = 1 from one horizontal and one vertical neighbor.
double eikonal_solve(const Front& f, int x1, int y1, int x2, int y2) {
    double sol = kFar;
    bool k1 = f.inside(x1, y1) && f.flag[f.idx(x1, y1)] == KNOWN;
    bool k2 = f.inside(x2, y2) && f.flag[f.idx(x2, y2)] == KNOWN;
    if (k1 && k2) {
        double t1 = f.dist[f.idx(x1, y1)];
        double t2 = f.dist[f.idx(x2, y2)];
        double d = 2.0 - (t1 - t2) * (t1 - t2);
        if (d > 0.0) {
            double r = std::sqrt(d);
            double s = (t1 + t2 - r) / 2.0;
            if (s >= t1 && s >= t2) return s;
            s += r;
            if (s >= t1 && s >= t2) return s;
        }
        return 1.0 + std::min(t1, t2);
    }
    if (k1) sol = 1.0 + f.dist[f.idx(x1, y1)];
    if (k2) sol = std::min(sol, 1.0 + f.dist[f.idx(x2, y2)]);
    return sol;
}

double eikonal_update(const Front& f, int x, int y) {
    double a = eikonal_solve(f, x - 1, y, x, y - 1);
    double b = eikonal_solve(f, x + 1, y, x, y - 1);
    double c = eikonal_solve(f, x - 1, y, x, y + 1);
    double d = eikonal_solve(f, x + 1, y, x, y + 1);
    return std::min(std::min(a, b), std::min(c, d));
}

// Gradient of the arrival-time field at an inpaint-front pixel, using
// whichever neighbors already carry usable distances.
std::pair<double, double> dist_gradient(const Front& f, int x, int y) {
    auto usable = [&](int xx, int yy) {
        return f.inside(xx, yy) && f.flag[f.idx(xx, yy)] != INSIDE;
    };
    double gx = 0.0, gy = 0.0;
    double t = f.dist[f.idx(x, y)];
    if (usable(x - 1, y) && usable(x + 1, y))
        gx = (f.dist[f.idx(x + 1, y)] - f.dist[f.idx(x - 1, y)]) / 2.0;
    else if (usable(x + 1, y))
        gx = f.dist[f.idx(x + 1, y)] - t;
    else if (usable(x - 1, y))
        gx = t - f.dist[f.idx(x - 1, y)];
    if (usable(x, y - 1) && usable(x, y + 1))
        gy = (f.dist[f.idx(x, y + 1)] - f.dist[f.idx(x, y - 1)]) / 2.0;
    else if (usable(x, y + 1))
        gy = f.dist[f.idx(x, y + 1)] - t;
    else if (usable(x, y - 1))
        gy = t - f.dist[f.idx(x, y - 1)];
    return {gx, gy};
}

double fill_pixel(const Front& f, const std::vector<double>& img, int x, int y, int radius) {
    auto [nx, ny] = dist_gradient(f, x, y);
    double t_here = f.dist[f.idx(x, y)];
    double wsum = 0.0, vsum = 0.0;
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            if (dx == 0 && dy == 0) continue;
            int qx = x + dx, qy = y + dy;
            if (!f.inside(qx, qy)) continue;
            size_t qi = f.idx(qx, qy);
            if (f.flag[qi] != KNOWN) continue;
            double r2 = double(dx) * dx + double(dy) * dy;
            if (r2 > double(radius) * radius) continue;
            double rlen = std::sqrt(r2);
            double dir = (dx * nx + dy * ny) / rlen;
            if (std::fabs(dir) < kEps) dir = kEps;
            double dst = 1.0 / r2;
            double lev = 1.0 / (1.0 + std::fabs(t_here - f.dist[qi]));
            double w = std::fabs(dir * dst * lev);
            wsum += w;
            vsum += w * img[qi];
        }
    }
    if (wsum <= 0.0) return img[f.idx(x, y)];  // unreachable for radius >= 1
    return vsum / wsum;
}

}  // namespace

ValidityMask validity_mask(const HeightMap& h) {
    validate(h);
    ValidityMask m;
    m.width = h.width;
    m.height = h.height;
    m.ok.resize(h.z.size());
    for (size_t i = 0; i < h.z.size(); ++i) m.ok[i] = is_missing(h.z[i]) ? 0 : 1;
    return m;
}

HeightMap inpaint_missing(const HeightMap& h, int radius_px) {
    validate(h);
    if (radius_px < 1) throw std::invalid_argument("inpaint radius_px must be >= 1");

    std::vector<double> finite;
    finite.reserve(h.z.size());
    for (double v : h.z)
        if (!is_missing(v)) finite.push_back(v);
    if (finite.empty()) throw std::invalid_argument("inpaint_missing: no finite pixels");
    if (finite.size() == h.z.size()) return h;

    std::sort(finite.begin(), finite.end());
    double lo = percentile_sorted(finite, 0.5);
    double hi = percentile_sorted(finite, 99.5);

    HeightMap out = h;
    if (!(hi > lo)) {
        // degenerate robust range: every missing pixel takes the robust value
        for (double& v : out.z)
            if (is_missing(v)) v = lo;
        return out;
    }

    // temporary 8-bit map: clamp to the robust band, then quantize
    const size_t n = h.z.size();
    std::vector<double> img(n, 0.0);
    Front f{h.width, h.height, std::vector<uint8_t>(n, KNOWN), std::vector<double>(n, 0.0), {}};
    for (size_t i = 0; i < n; ++i) {
        if (is_missing(h.z[i])) {
            f.flag[i] = INSIDE;
            f.dist[i] = kFar;
        } else {
            double u = (std::clamp(h.z[i], lo, hi) - lo) / (hi - lo);
            img[i] = round_half_away(u * 255.0);
        }
    }

    // initial band: missing pixels 4-adjacent to a known pixel
    for (int y = 0; y < h.height; ++y) {
        for (int x = 0; x < h.width; ++x) {
            size_t i = f.idx(x, y);
            if (f.flag[i] != INSIDE) continue;
            bool touches_known =
                (x > 0 && f.flag[i - 1] == KNOWN) || (x + 1 < h.width && f.flag[i + 1] == KNOWN) ||
                (y > 0 && f.flag[i - h.width] == KNOWN) ||
                (y + 1 < h.height && f.flag[i + h.width] == KNOWN);
            if (touches_known) {
                f.flag[i] = BAND;
                f.dist[i] = eikonal_update(f, x, y);
                f.heap.push({f.dist[i], static_cast<int>(i)});
            }
        }
    }

    // march: pop nearest band pixel, fill it, relax neighbors
    while (!f.heap.empty()) {
        auto [t, ii] = f.heap.top();
        f.heap.pop();
        size_t i = static_cast<size_t>(ii);
        if (f.flag[i] != BAND || f.dist[i] != t) continue;  // stale entry
        int x = static_cast<int>(i % h.width);
        int y = static_cast<int>(i / h.width);
        img[i] = fill_pixel(f, img, x, y, radius_px);
        f.flag[i] = KNOWN;
        const int nx[4] = {x - 1, x + 1, x, x};
        const int ny[4] = {y, y, y - 1, y + 1};
        for (int k = 0; k < 4; ++k) {
            if (!f.inside(nx[k], ny[k])) continue;
            size_t j = f.idx(nx[k], ny[k]);
            if (f.flag[j] == KNOWN) continue;
            double tj = eikonal_update(f, nx[k], ny[k]);
            if (f.flag[j] == INSIDE || tj < f.dist[j]) {
                f.flag[j] = BAND;
                f.dist[j] = tj;
                f.heap.push({tj, static_cast<int>(j)});
            }
        }
    }

    // invert the robust scaling for filled pixels; originally finite pixels keep
    // their input bits untouched
    double step = (hi - lo) / 255.0;
    for (size_t i = 0; i < n; ++i)
        if (is_missing(out.z[i])) out.z[i] = lo + img[i] * step;
    return out;
}

}  // namespace reliefscan::preprocess
