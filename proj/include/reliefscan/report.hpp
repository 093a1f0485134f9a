#ifndef RELIEFSCAN_REPORT_HPP
#define RELIEFSCAN_REPORT_HPP

#include <span>
#include <string>
#include <vector>

#include "reliefscan/stats.hpp"

namespace reliefscan::report {

// Quartile box with Tukey whiskers: whiskers reach the most extreme data values
// within 1.5×IQR of the quartiles; points beyond are outliers (omitted when drawn).
struct BoxStats {
    double q1 = 0.0, median = 0.0, q3 = 0.0;
    double lo_whisker = 0.0, hi_whisker = 0.0;
    size_t n = 0;
};

BoxStats tukey_box_stats(std::span<const double> values);

struct BoxGroup {
    std::string label;                       // x-axis label (pitch)
    std::vector<double> matched;
    std::vector<double> cross_res;
};

// Grouped box plot (matched vs cross-resolution per pitch) with a dashed reference
// line at Dice = 0.70. Output bytes are deterministic.
std::string grouped_boxplot_svg(const std::vector<BoxGroup>& groups, double ref_line = 0.70);

// Markdown table: per pitch and regime, median [Q1, Q3] and mean ± s.d.
std::string summary_markdown(const std::vector<BoxGroup>& groups);

}  // namespace reliefscan::report

#endif
