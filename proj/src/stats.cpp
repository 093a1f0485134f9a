#include "reliefscan/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "reliefscan/mathutil.hpp"
#include "reliefscan/rng.hpp"

namespace reliefscan::stats {

void PairedMatrix::check() const {
    if (n_conditions < 2) throw std::invalid_argument("paired matrix needs k >= 2 conditions");
    if (n_subjects < 2) throw std::invalid_argument("paired matrix needs n >= 2 subjects");
    if (condition_labels.size() != n_conditions)
        throw std::invalid_argument("paired matrix label count mismatch");
    if (values.size() != n_subjects * n_conditions)
        throw std::invalid_argument("paired matrix is incomplete");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("paired matrix has non-finite cells");
}

std::vector<double> average_ranks(std::span<const double> values) {
    const size_t n = values.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

Summary summarize(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("summarize: empty input");
    Summary s;
    s.n = values.size();
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    s.median = percentile_sorted(sorted, 50.0);
    s.q1 = percentile_sorted(sorted, 25.0);
    s.q3 = percentile_sorted(sorted, 75.0);
    s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(s.n);
    if (s.n < 2) {
        s.sd = 0.0;
        s.degenerate_sd = true;
    } else {
        double acc = 0.0;
        for (double v : sorted) acc += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(acc / static_cast<double>(s.n - 1));
    }
    return s;
}

namespace {

// regularized upper incomplete gamma Q(a, x) by series / continued fraction
double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain");
    if (x == 0.0) return 1.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        // P(a,x) by series, Q = 1 - P
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
        }
        double p = sum * std::exp(-x + a * std::log(x) - lg);
        return std::max(0.0, 1.0 - p);
    }
    // Q(a,x) by Lentz continued fraction
    double b = x + 1.0 - a, c = 1e308, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::fabs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - lg) * h;
}

}  // namespace

double chi2_sf(double x, int df) {
    if (df < 1) throw std::invalid_argument("chi2_sf: df must be >= 1");
    if (x <= 0.0) return 1.0;
    double q = gamma_q(static_cast<double>(df) / 2.0, x / 2.0);
    return std::clamp(q, 5e-324, 1.0);  // keep p in (0, 1]
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

// within-subject average ranks, plus the tie term sum(t^3 - t) per subject
void subject_ranks(const PairedMatrix& m, std::vector<double>& ranks, double& tie_sum) {
    const size_t n = m.n_subjects, k = m.n_conditions;
    ranks.resize(n * k);
    tie_sum = 0.0;
    std::vector<double> row(k);
    for (size_t s = 0; s < n; ++s) {
        for (size_t j = 0; j < k; ++j) row[j] = m.at(s, j);
        auto r = average_ranks(row);
        std::copy(r.begin(), r.end(), ranks.begin() + s * k);

        std::vector<double> sorted(row);
        std::sort(sorted.begin(), sorted.end());
        size_t i = 0;
        while (i < k) {
            size_t j = i;
            while (j + 1 < k && sorted[j + 1] == sorted[i]) ++j;
            double t = static_cast<double>(j - i + 1);
            tie_sum += t * t * t - t;
            i = j + 1;
        }
    }
}

}  // namespace

TestReport friedman(const PairedMatrix& m) {
    m.check();
    const size_t n = m.n_subjects, k = m.n_conditions;
    std::vector<double> ranks;
    double tie_sum = 0.0;
    subject_ranks(m, ranks, tie_sum);

    std::vector<double> rank_sums(k, 0.0);
    for (size_t s = 0; s < n; ++s)
        for (size_t j = 0; j < k; ++j) rank_sums[j] += ranks[s * k + j];

    double ss = 0.0;
    for (double r : rank_sums) ss += r * r;
    const double nn = static_cast<double>(n), kk = static_cast<double>(k);
    double chi2 = (12.0 / (nn * kk * (kk + 1.0))) * ss - 3.0 * nn * (kk + 1.0);
    double correction = 1.0 - tie_sum / (nn * kk * (kk * kk - 1.0));
    if (correction <= 0.0)
        throw std::invalid_argument("friedman: degenerate statistic (all conditions tied)");
    chi2 /= correction;

    TestReport r;
    r.method = "friedman";
    r.statistic = chi2;
    r.p_value = chi2_sf(chi2, static_cast<int>(k) - 1);
    r.n = n;
    r.k = k;
    r.extra = rank_sums;
    return r;
}

TestReport pages_l(const PairedMatrix& m, const std::vector<std::string>& hypothesized_order,
                   int n_perm, uint64_t seed) {
    m.check();
    const size_t n = m.n_subjects, k = m.n_conditions;
    if (hypothesized_order.size() != k)
        throw std::invalid_argument("pages_l: order must list every condition exactly once");
    std::vector<size_t> col_of(k);
    for (size_t j = 0; j < k; ++j) {
        auto it = std::find(m.condition_labels.begin(), m.condition_labels.end(),
                            hypothesized_order[j]);
        if (it == m.condition_labels.end())
            throw std::invalid_argument("pages_l: unknown condition '" + hypothesized_order[j] +
                                        "' in hypothesized order");
        col_of[j] = static_cast<size_t>(it - m.condition_labels.begin());
    }
    {
        std::vector<size_t> check(col_of);
        std::sort(check.begin(), check.end());
        for (size_t j = 0; j < k; ++j)
            if (check[j] != j)
                throw std::invalid_argument("pages_l: order is not a permutation of conditions");
    }

    std::vector<double> ranks;
    double tie_sum = 0.0;
    subject_ranks(m, ranks, tie_sum);

    auto l_stat = [&](const std::vector<double>& rk) {
        double l = 0.0;
        for (size_t j = 0; j < k; ++j) {
            double rsum = 0.0;
            for (size_t s = 0; s < n; ++s) rsum += rk[s * k + col_of[j]];
            l += static_cast<double>(j + 1) * rsum;
        }
        return l;
    };
    const double l_obs = l_stat(ranks);

    if (n_perm < 1) throw std::invalid_argument("pages_l: n_perm must be >= 1");
    Rng rng(derive_seed(seed, {0x7061676573}));
    size_t ge = 0;
    std::vector<double> perm(ranks);
    for (int it = 0; it < n_perm; ++it) {
        for (size_t s = 0; s < n; ++s) {
            double* row = perm.data() + s * k;
            for (size_t i = k; i > 1; --i)
                std::swap(row[i - 1], row[rng.below(i)]);
        }
        if (l_stat(perm) >= l_obs) ++ge;
    }

    TestReport r;
    r.method = "pages_l";
    r.statistic = l_obs;
    r.p_value = (static_cast<double>(ge) + 1.0) / (static_cast<double>(n_perm) + 1.0);
    r.n = n;
    r.k = k;
    return r;
}

TestReport wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("wilcoxon: unequal lengths");
    if (x.size() < 2) throw std::invalid_argument("wilcoxon: need at least 2 pairs");

    std::vector<double> d;
    for (size_t i = 0; i < x.size(); ++i) {
        double diff = x[i] - y[i];
        if (diff != 0.0) d.push_back(diff);
    }
    if (d.empty()) throw std::invalid_argument("wilcoxon: all differences are zero");

    const size_t n = d.size();
    std::vector<double> absd(n);
    for (size_t i = 0; i < n; ++i) absd[i] = std::fabs(d[i]);
    auto ranks = average_ranks(absd);

    double w_pos = 0.0, w_neg = 0.0;
    for (size_t i = 0; i < n; ++i) (d[i] > 0.0 ? w_pos : w_neg) += ranks[i];
    const double w = std::min(w_pos, w_neg);

    TestReport r;
    r.method = "wilcoxon_signed_rank";
    r.statistic = w;
    r.n = n;
    r.k = 2;
    r.extra = {w_pos, w_neg};

    if (n <= 20) {
        // exact two-sided p over all 2^n sign assignments; DP over doubled ranks,
        // which are integers even with .5 tie ranks
        std::vector<long> r2(n);
        long total2 = 0;
        for (size_t i = 0; i < n; ++i) {
            r2[i] = std::lround(ranks[i] * 2.0);
            total2 += r2[i];
        }
        std::vector<double> count(static_cast<size_t>(total2) + 1, 0.0);
        count[0] = 1.0;
        long reach = 0;
        for (size_t i = 0; i < n; ++i) {
            reach += r2[i];
            for (long s = reach; s >= r2[i]; --s) count[s] += count[s - r2[i]];
        }
        const double denom = std::pow(2.0, static_cast<double>(n));
        const long w2 = std::lround(w * 2.0);
        double cdf_le = 0.0;
        for (long s = 0; s <= w2 && s <= total2; ++s) cdf_le += count[s];
        r.p_value = std::min(1.0, 2.0 * cdf_le / denom);
        r.note = "exact enumeration";
    } else {
        // normal approximation with tie correction and continuity correction
        double tie_term = 0.0;
        {
            std::vector<double> sorted(absd);
            std::sort(sorted.begin(), sorted.end());
            size_t i = 0;
            while (i < n) {
                size_t j = i;
                while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
                double t = static_cast<double>(j - i + 1);
                tie_term += t * t * t - t;
                i = j + 1;
            }
        }
        const double nn = static_cast<double>(n);
        const double mean = nn * (nn + 1.0) / 4.0;
        const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
        if (!(var > 0.0)) throw std::invalid_argument("wilcoxon: zero variance (all ranks tied away)");
        const double z = (w - mean + 0.5) / std::sqrt(var);
        r.p_value = std::min(1.0, 2.0 * normal_cdf(z));
        r.note = "normal approximation";
    }
    return r;
}

std::vector<double> holm_adjust(const std::vector<double>& p) {
    const size_t m = p.size();
    for (double v : p)
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("holm_adjust: p outside [0,1]");
    std::vector<size_t> order(m);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return p[a] < p[b]; });
    std::vector<double> adjusted(m, 0.0);
    double running = 0.0;
    for (size_t i = 0; i < m; ++i) {
        double scaled = std::min(1.0, static_cast<double>(m - i) * p[order[i]]);
        running = std::max(running, scaled);
        adjusted[order[i]] = running;
    }
    return adjusted;
}

}  // namespace reliefscan::stats
