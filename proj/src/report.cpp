#include "reliefscan/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace reliefscan::report {

BoxStats tukey_box_stats(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("tukey_box_stats: empty input");
    auto s = stats::summarize(values);
    BoxStats b;
    b.q1 = s.q1;
    b.median = s.median;
    b.q3 = s.q3;
    b.n = values.size();
    const double iqr = s.q3 - s.q1;
    const double lo_fence = s.q1 - 1.5 * iqr;
    const double hi_fence = s.q3 + 1.5 * iqr;
    b.lo_whisker = s.q3;
    b.hi_whisker = s.q1;
    bool any = false;
    for (double v : values) {
        if (v < lo_fence || v > hi_fence) continue;
        if (!any) {
            b.lo_whisker = b.hi_whisker = v;
            any = true;
        } else {
            b.lo_whisker = std::min(b.lo_whisker, v);
            b.hi_whisker = std::max(b.hi_whisker, v);
        }
    }
    if (!any) {  // every point is an outlier; collapse whiskers onto the box
        b.lo_whisker = s.q1;
        b.hi_whisker = s.q3;
    }
    return b;
}

namespace {

std::string fmt(double v, int decimals = 2) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

struct Canvas {
    std::string body;

    void line(double x1, double y1, double x2, double y2, const std::string& color,
              double width = 1.0, bool dashed = false) {
        body += "<line x1='" + fmt(x1) + "' y1='" + fmt(y1) + "' x2='" + fmt(x2) + "' y2='" +
                fmt(y2) + "' stroke='" + color + "' stroke-width='" + fmt(width, 1) + "'";
        if (dashed) body += " stroke-dasharray='6,4'";
        body += "/>\n";
    }
    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke) {
        body += "<rect x='" + fmt(x) + "' y='" + fmt(y) + "' width='" + fmt(w) + "' height='" +
                fmt(h) + "' fill='" + fill + "' stroke='" + stroke + "' stroke-width='1.0'/>\n";
    }
    void text(double x, double y, const std::string& s, int size, const std::string& anchor,
              const std::string& color = "#333333") {
        body += "<text x='" + fmt(x) + "' y='" + fmt(y) + "' font-size='" + std::to_string(size) +
                "' font-family='sans-serif' text-anchor='" + anchor + "' fill='" + color + "'>" +
                s + "</text>\n";
    }
};

}  // namespace

std::string grouped_boxplot_svg(const std::vector<BoxGroup>& groups, double ref_line) {
    if (groups.empty()) throw std::invalid_argument("grouped_boxplot_svg: no groups");

    const double width = 960.0, height = 540.0;
    const double ml = 64.0, mr = 20.0, mt = 38.0, mb = 64.0;
    const double plot_w = width - ml - mr, plot_h = height - mt - mb;
    const double y_min = 0.0, y_max = 1.0;
    auto ypix = [&](double v) { return mt + (y_max - v) / (y_max - y_min) * plot_h; };

    const std::string matched_color = "#ff7f0e";  // matched-resolution boxes
    const std::string cross_color = "#1f77b4";    // cross-resolution boxes

    Canvas c;
    c.rect(ml, mt, plot_w, plot_h, "none", "#888888");

    for (int t = 0; t <= 10; ++t) {
        double v = t / 10.0;
        double y = ypix(v);
        c.line(ml - 4, y, ml, y, "#555555");
        if (t > 0 && t < 10) c.line(ml, y, ml + plot_w, y, "#eeeeee");
        c.text(ml - 8, y + 4, fmt(v, 1), 12, "end");
    }
    c.line(ml, ypix(ref_line), ml + plot_w, ypix(ref_line), "#444444", 1.2, true);
    c.text(ml + plot_w - 4, ypix(ref_line) - 5, "Dice = " + fmt(ref_line), 11, "end", "#444444");

    const double slot = plot_w / static_cast<double>(groups.size());
    const double box_w = std::min(22.0, slot / 3.2);

    auto draw_box = [&](double cx, std::span<const double> vals, const std::string& color) {
        if (vals.empty()) return;
        BoxStats b = tukey_box_stats(vals);
        // whiskers
        c.line(cx, ypix(b.lo_whisker), cx, ypix(b.q1), color);
        c.line(cx, ypix(b.q3), cx, ypix(b.hi_whisker), color);
        c.line(cx - box_w / 2, ypix(b.lo_whisker), cx + box_w / 2, ypix(b.lo_whisker), color);
        c.line(cx - box_w / 2, ypix(b.hi_whisker), cx + box_w / 2, ypix(b.hi_whisker), color);
        // box; a degenerate box renders as a line segment
        double top = ypix(b.q3), bot = ypix(b.q1);
        if (bot - top < 0.01) {
            c.line(cx - box_w / 2, top, cx + box_w / 2, top, color, 1.5);
        } else {
            c.rect(cx - box_w / 2, top, box_w, bot - top, "none", color);
        }
        c.line(cx - box_w / 2, ypix(b.median), cx + box_w / 2, ypix(b.median), color, 2.0);
    };

    for (size_t g = 0; g < groups.size(); ++g) {
        double center = ml + slot * (static_cast<double>(g) + 0.5);
        draw_box(center - box_w * 0.75, groups[g].matched, matched_color);
        draw_box(center + box_w * 0.75, groups[g].cross_res, cross_color);
        c.text(center, mt + plot_h + 18, groups[g].label, 12, "middle");
    }

    c.text(ml + plot_w / 2, height - 14, "lateral pixel size (um)", 13, "middle");
    c.text(ml + 10, mt - 10, "matched resolution", 12, "start", matched_color);
    c.text(ml + 170, mt - 10, "trained at native, degraded input", 12, "start", cross_color);

    std::string out = "<svg xmlns='http://www.w3.org/2000/svg' width='" + fmt(width, 0) +
                      "' height='" + fmt(height, 0) + "' viewBox='0 0 " + fmt(width, 0) + " " +
                      fmt(height, 0) + "'>\n";
    out += "<rect x='0' y='0' width='" + fmt(width, 0) + "' height='" + fmt(height, 0) +
           "' fill='white'/>\n";
    out += c.body;
    out += "</svg>\n";
    return out;
}

std::string summary_markdown(const std::vector<BoxGroup>& groups) {
    std::string out;
    out += "| Pixel size (um) | Matched median [Q1, Q3] | Matched mean ± s.d. | "
           "Cross-res median [Q1, Q3] | Cross-res mean ± s.d. |\n";
    out += "|---|---|---|---|---|\n";
    auto cell = [](std::span<const double> vals) -> std::pair<std::string, std::string> {
        if (vals.empty()) return {"–", "–"};
        auto s = stats::summarize(vals);
        return {fmt(s.median, 3) + " [" + fmt(s.q1, 3) + ", " + fmt(s.q3, 3) + "]",
                fmt(s.mean, 3) + " ± " + fmt(s.sd, 3)};
    };
    for (const auto& g : groups) {
        auto [m1, m2] = cell(g.matched);
        auto [c1, c2] = cell(g.cross_res);
        out += "| " + g.label + " | " + m1 + " | " + m2 + " | " + c1 + " | " + c2 + " |\n";
    }
    return out;
}

}  // namespace reliefscan::report
