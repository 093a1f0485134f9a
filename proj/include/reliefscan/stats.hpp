#ifndef RELIEFSCAN_STATS_HPP
#define RELIEFSCAN_STATS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "reliefscan/types.hpp"

namespace reliefscan::stats {

// n subjects × k conditions, complete (no missing cells), row-major.
struct PairedMatrix {
    size_t n_subjects = 0;
    size_t n_conditions = 0;
    std::vector<std::string> condition_labels;
    std::vector<double> values;

    double at(size_t subject, size_t cond) const {
        return values[subject * n_conditions + cond];
    }
    void check() const;  // throws on shape violations (k >= 2, n >= 2, complete)
};

struct Summary {
    double median = 0.0, q1 = 0.0, q3 = 0.0, mean = 0.0, sd = 0.0;
    size_t n = 0;
    bool degenerate_sd = false;  // n == 1: sd reported as 0
};

// Median/quartiles via the shared linear-interpolation percentile rule; sd is the
// sample (n-1) standard deviation.
Summary summarize(std::span<const double> values);

struct TestReport {
    std::string method;
    double statistic = 0.0;
    double p_value = 1.0;
    size_t n = 0;
    size_t k = 0;
    bool degenerate = false;          // set instead of throwing by *_or_degenerate helpers
    std::string note;
    std::vector<double> extra;        // method-specific (rank sums, W+, W-, ...)
};

// Friedman omnibus over within-subject average ranks with the standard tie
// correction; p from the chi-square(k-1) upper tail. All-tied data is degenerate.
TestReport friedman(const PairedMatrix& m);

// Page's L = sum_j j * R_j under the hypothesized condition order (expected
// smallest first). One-sided p by seeded Monte-Carlo permutation of condition
// labels within subjects: p = (#{L_perm >= L_obs} + 1) / (n_perm + 1).
TestReport pages_l(const PairedMatrix& m, const std::vector<std::string>& hypothesized_order,
                   int n_perm = 9999, uint64_t seed = 0);

// Two-tailed Wilcoxon signed-rank on paired vectors. Zero differences dropped;
// ties get average ranks; W = min(W+, W-). Exact enumeration for effective
// n <= 20, otherwise normal approximation with tie and continuity correction.
TestReport wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y);

// Holm step-down adjustment; output in the input order.
std::vector<double> holm_adjust(const std::vector<double>& p);

// chi-square upper tail and standard normal CDF (used by the tests above).
double chi2_sf(double x, int df);
double normal_cdf(double z);

// Average ranks (1-based) with ties averaged; independent of the test functions
// so it can double as an oracle building block.
std::vector<double> average_ranks(std::span<const double> values);

}  // namespace reliefscan::stats

#endif
