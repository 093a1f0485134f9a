// Acceptance suite: end-to-end checks of the numeric kernels and the trend-level
// behavior of the full pipeline on the default synthetic corpus. Prints one
// PASS/FAIL line per criterion; exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "reliefscan/cli.hpp"
#include "reliefscan/eval.hpp"
#include "reliefscan/hmap_io.hpp"
#include "reliefscan/preprocess.hpp"
#include "reliefscan/report.hpp"
#include "reliefscan/resample.hpp"
#include "reliefscan/rng.hpp"
#include "reliefscan/segment.hpp"
#include "reliefscan/stats.hpp"
#include "reliefscan/synth.hpp"

using namespace reliefscan;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Harness {
    int failures = 0;

    void run(int id, const std::string& name, const std::function<bool(std::string&)>& fn) {
        auto t0 = Clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        std::printf("%s: criterion %d — %s (%.1f s)%s%s\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                    secs, detail.empty() ? "" : " — ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

struct CheckList {
    std::string& detail;
    bool ok = true;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return "<missing:" + p.string() + ">";
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

double median_of(const std::vector<double>& v) { return stats::summarize(v).median; }

std::map<double, std::vector<double>> by_pitch(const eval::ResultTable& t) {
    std::map<double, std::vector<double>> out;
    for (const auto& r : t.rows) out[r.pitch_um].push_back(r.dice);
    return out;
}

// ---- criterion 1 -----------------------------------------------------------

bool dice_oracle_equivalence(std::string& detail) {
    CheckList c{detail};
    Rng rng(101);
    for (int trial = 0; trial < 500; ++trial) {
        LabelMask a{32, 32, std::vector<uint8_t>(1024)};
        LabelMask b{32, 32, std::vector<uint8_t>(1024)};
        double pa = rng.uniform01(), pb = rng.uniform01();
        for (auto& v : a.ink) v = rng.uniform01() < pa ? 1 : 0;
        for (auto& v : b.ink) v = rng.uniform01() < pb ? 1 : 0;
        size_t na = 0, nb = 0, inter = 0;
        for (size_t i = 0; i < 1024; ++i) {
            na += a.ink[i] != 0;
            nb += b.ink[i] != 0;
            inter += (a.ink[i] && b.ink[i]);
        }
        double oracle = (na + nb == 0) ? 1.0 : 2.0 * double(inter) / double(na + nb);
        if (eval::dice(a, b) != oracle) {
            c.expect(false, "mismatch vs set-counting oracle at trial " + std::to_string(trial));
            break;
        }
    }
    LabelMask empty{16, 16, std::vector<uint8_t>(256, 0)};
    c.expect(eval::dice(empty, empty) == 1.0, "both-empty convention != 1.0");
    return c.ok;
}

// ---- criterion 2 -----------------------------------------------------------

bool inpaint_restoration(std::string& detail) {
    CheckList c{detail};
    for (uint64_t seed = 1; seed <= 100 && c.ok; ++seed) {
        Rng rng(seed);
        HeightMap m;
        m.width = 64;
        m.height = 48;
        m.pitch_um = 0.34;
        m.z.resize(64 * 48);
        for (auto& v : m.z) v = rng.uniform(-5.0, 12.0);
        double frac = rng.uniform(0.01, 0.05);
        size_t k = static_cast<size_t>(frac * m.z.size());
        for (size_t j = 0; j < k; ++j) m.z[rng.below(m.z.size())] = missing_value();

        HeightMap filled = preprocess::inpaint_missing(m, 3);
        for (size_t i = 0; i < m.z.size(); ++i) {
            if (is_missing(m.z[i])) {
                if (is_missing(filled.z[i])) {
                    c.expect(false, "non-finite output pixel, seed " + std::to_string(seed));
                    break;
                }
            } else if (filled.z[i] != m.z[i]) {
                c.expect(false, "finite pixel not bit-identical, seed " + std::to_string(seed));
                break;
            }
        }
    }
    // constant maps fill exactly
    HeightMap flat;
    flat.width = 32;
    flat.height = 32;
    flat.pitch_um = 1.0;
    flat.z.assign(1024, -3.75);
    Rng rng(7);
    for (int j = 0; j < 40; ++j) flat.z[rng.below(flat.z.size())] = missing_value();
    HeightMap filled = preprocess::inpaint_missing(flat, 3);
    for (double v : filled.z) c.expect(v == -3.75, "constant map fill not exact");
    return c.ok;
}

// ---- criterion 3 -----------------------------------------------------------

bool resampling_kernels(std::string& detail) {
    CheckList c{detail};

    HeightMap m;
    m.width = 2;
    m.height = 2;
    m.pitch_um = 0.34;
    m.z = {1.0, 2.0, 3.0, 4.0};
    c.expect(resample::block_downsample(m, 2).z[0] == 2.5, "block mean of [1,2;3,4] != 2.5");

    auto ladder = resample::PitchLadder::default_ladder();
    const std::vector<double> expect = {0.34, 0.68, 1.02, 1.36, 2.04, 2.72, 3.40, 5.44, 10.88};
    for (size_t i = 0; i < expect.size(); ++i)
        c.expect(ladder.pitches_um[i] == expect[i],
                 "ladder pitch " + std::to_string(i) + " not exact");

    // plane round-trip interior error
    HeightMap plane;
    plane.width = 96;
    plane.height = 64;
    plane.pitch_um = 0.34;
    plane.z.resize(96 * 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 96; ++x) plane.z[size_t(y) * 96 + x] = 0.31 * x - 0.17 * y + 1.0;
    for (int n : {2, 4, 8}) {
        HeightMap rt = resample::degrade_roundtrip(plane, n);
        double worst = 0.0;
        for (int y = n; y < rt.height - n; ++y)
            for (int x = n; x < rt.width - n; ++x)
                worst = std::max(worst, std::fabs(rt.at(x, y) - (0.31 * x - 0.17 * y + 1.0)));
        c.expect(worst <= 1e-9, "plane round-trip interior error " + std::to_string(worst));
    }

    HeightMap one;
    one.width = 1;
    one.height = 1;
    one.pitch_um = 1.0;
    one.z = {7.1};
    c.expect(resample::zbin(one, 3.40).z[0] == 8.5, "zbin(7.1, 3.40) != 8.5");

    Rng rng(5);
    HeightMap rand;
    rand.width = 32;
    rand.height = 32;
    rand.pitch_um = 1.0;
    rand.z.resize(1024);
    for (auto& v : rand.z) v = rng.uniform(-30.0, 30.0);
    for (double delta : ladder.pitches_um) {
        HeightMap zb = resample::zbin(rand, delta);
        for (size_t i = 0; i < rand.z.size(); ++i)
            c.expect(std::fabs(zb.z[i] - rand.z[i]) <= delta / 2.0 + 1e-12,
                     "zbin error above delta/2");
    }
    return c.ok;
}

// ---- criterion 4 -----------------------------------------------------------

bool statistics_oracles(std::string& detail) {
    CheckList c{detail};

    stats::PairedMatrix m;
    m.n_subjects = 10;
    m.n_conditions = 3;
    m.condition_labels = {"c0", "c1", "c2"};
    Rng rng(3);
    for (size_t s = 0; s < 10; ++s)
        for (size_t j = 0; j < 3; ++j) m.values.push_back(double(j) + 0.05 * rng.uniform01());

    auto fr = stats::friedman(m);
    c.expect(std::fabs(fr.statistic - 20.0) <= 1e-9,
             "friedman chi2 != 2n (got " + std::to_string(fr.statistic) + ")");

    auto pl = stats::pages_l(m, m.condition_labels, 9999, 17);
    c.expect(pl.statistic == 140.0, "pages L != 140");
    c.expect(pl.p_value == 1.0 / 10000.0, "pages p != 1e-4 at n_perm 9999");

    std::vector<double> x = {1, 2, 3, 4, 5}, y = {0.5, 1.0, 1.5, 2.0, 2.5};
    auto w = stats::wilcoxon_signed_rank(x, y);
    c.expect(w.statistic == 0.0 && w.p_value == 0.0625, "wilcoxon exact p != 0.0625");

    auto adj = stats::holm_adjust({0.01, 0.04, 0.03});
    c.expect(std::fabs(adj[0] - 0.03) < 1e-15 && std::fabs(adj[1] - 0.06) < 1e-15 &&
                 std::fabs(adj[2] - 0.06) < 1e-15,
             "holm([0.01,0.04,0.03]) != [0.03,0.06,0.06]");
    return c.ok;
}

// ---- criterion 5 -----------------------------------------------------------

bool gradient_check(std::string& detail) {
    CheckList c{detail};
    Rng rng(23);
    for (int inst = 0; inst < 20; ++inst) {
        const size_t n = 64, f = 7;
        std::vector<double> x(n * f);
        std::vector<uint8_t> y(n);
        for (auto& v : x) v = rng.uniform(-2.0, 2.0);
        for (auto& v : y) v = rng.coin() ? 1 : 0;
        y[0] = 1;
        y[1] = 0;
        std::vector<double> w(f);
        for (auto& v : w) v = rng.uniform(-1.0, 1.0);
        double b = rng.uniform(-0.5, 0.5);

        auto g = segment::composite_loss_grad(w, b, x.data(), y.data(), n, f);
        const double eps = 1e-6;
        double num = 0.0, den = 0.0;
        for (size_t j = 0; j < f; ++j) {
            auto wp = w, wm = w;
            wp[j] += eps;
            wm[j] -= eps;
            double fd = (segment::composite_loss(wp, b, x.data(), y.data(), n, f) -
                         segment::composite_loss(wm, b, x.data(), y.data(), n, f)) /
                        (2 * eps);
            num += (g.dw[j] - fd) * (g.dw[j] - fd);
            den += fd * fd;
        }
        double fdb = (segment::composite_loss(w, b + eps, x.data(), y.data(), n, f) -
                      segment::composite_loss(w, b - eps, x.data(), y.data(), n, f)) /
                     (2 * eps);
        num += (g.db - fdb) * (g.db - fdb);
        den += fdb * fdb;
        double rel = std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
        c.expect(rel <= 1e-4, "relative gradient error " + std::to_string(rel));
    }
    return c.ok;
}

// ---- criteria 6 + 8 share the default corpus and engine --------------------

struct TrendResults {
    eval::ResultTable matched, cross, zbinned, lopo;
    double seconds = 0.0;
    bool ready = false;
};

TrendResults g_trend;

void run_default_pipeline(const fs::path& work) {
    auto t0 = Clock::now();
    fs::remove_all(work);

    synth::SynthConfig base;  // spec defaults: 1024x1024 at 0.34 um
    base.seed = 20260808;
    auto manifest = synth::generate_corpus(base, synth::default_papyri(), work / "corpus");

    eval::ExperimentConfig cfg;
    cfg.seed = 42;
    eval::Engine engine(manifest, cfg);
    g_trend.matched = engine.run_matched();
    g_trend.cross = engine.run_cross_res();
    g_trend.zbinned = engine.run_zbin();
    g_trend.lopo = engine.run_lopo();
    g_trend.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    g_trend.ready = true;
}

bool trend_reproduction(std::string& detail) {
    CheckList c{detail};
    run_default_pipeline("acceptance_work");

    auto ladder = resample::PitchLadder::default_ladder();
    auto matched = by_pitch(g_trend.matched);
    auto cross = by_pitch(g_trend.cross);
    auto zb = by_pitch(g_trend.zbinned);

    const double native = ladder.pitches_um.front();
    const double coarsest = ladder.pitches_um.back();

    char buf[160];

    // (a) matched native level and matched decline to n=32
    double m_native = median_of(matched.at(native));
    double m_coarse = median_of(matched.at(coarsest));
    std::snprintf(buf, sizeof(buf), "matched median native=%.3f n32=%.3f", m_native, m_coarse);
    c.expect(m_native >= 0.80, std::string(buf) + ": native below 0.80");
    c.expect(m_native - m_coarse >= 0.25, std::string(buf) + ": decline below 0.25");

    // (b) ordered decline across the ladder (Page's L, permutation p), with the
    // matched medians strictly decreasing up to one adjacent inversion
    {
        stats::PairedMatrix pm;
        pm.n_conditions = ladder.pitches_um.size();
        for (double p : ladder.pitches_um) pm.condition_labels.push_back(io::format_double(p));
        std::map<std::string, std::vector<double>> per_sample;
        for (const auto& r : g_trend.matched.rows) per_sample[r.sample_id].push_back(r.dice);
        for (auto& [id, vals] : per_sample) {
            pm.values.insert(pm.values.end(), vals.begin(), vals.end());
            ++pm.n_subjects;
        }
        std::vector<std::string> order(pm.condition_labels.rbegin(), pm.condition_labels.rend());
        auto pl = stats::pages_l(pm, order, 9999, 11);
        std::snprintf(buf, sizeof(buf), "pages p=%.6f", pl.p_value);
        c.expect(pl.p_value <= 0.01, std::string(buf) + ": trend not significant");

        int inversions = 0;
        for (size_t i = 1; i < ladder.pitches_um.size(); ++i)
            if (median_of(matched.at(ladder.pitches_um[i])) >
                median_of(matched.at(ladder.pitches_um[i - 1])))
                ++inversions;
        std::snprintf(buf, sizeof(buf), "%d adjacent inversions in matched medians", inversions);
        c.expect(inversions <= 1, std::string(buf) + " (> 1)");
    }

    // (c) cross-resolution collapse, steeper than matched at coarse kernels
    double x_native = median_of(cross.at(native));
    for (size_t i = 0; i < ladder.kernels.size(); ++i) {
        int n = ladder.kernels[i];
        double p = ladder.pitches_um[i];
        if (n >= 10) {
            double drop = x_native - median_of(cross.at(p));
            std::snprintf(buf, sizeof(buf), "cross drop at n=%d is %.3f", n, drop);
            c.expect(drop >= 0.30, std::string(buf) + " (< 0.30)");
        }
        if (n >= 8) {
            double cross_decline = x_native - median_of(cross.at(p));
            double matched_decline = median_of(matched.at(native)) - median_of(matched.at(p));
            std::snprintf(buf, sizeof(buf), "n=%d cross decline %.3f vs matched %.3f", n,
                          cross_decline, matched_decline);
            c.expect(cross_decline > matched_decline, std::string(buf) + ": not steeper");
        }
    }

    // (d) z-binned medians close to matched per pitch
    for (double p : ladder.pitches_um) {
        double shift = std::fabs(median_of(zb.at(p)) - median_of(matched.at(p)));
        std::snprintf(buf, sizeof(buf), "zbin median shift %.3f at pitch %s", shift,
                      io::format_double(p).c_str());
        c.expect(shift <= 0.08, std::string(buf) + " (> 0.08)");
    }

    std::snprintf(buf, sizeof(buf), "full run %.0f s", g_trend.seconds);
    c.expect(g_trend.seconds < 600.0, std::string(buf) + " (over 10 min)");
    if (c.ok) detail = buf;
    return c.ok;
}

// ---- criterion 7 -----------------------------------------------------------

bool missingness_control(std::string& detail) {
    CheckList c{detail};
    int nonsig = 0;
    for (uint64_t run = 1; run <= 20; ++run) {
        std::vector<double> frac_ink, frac_pap;
        for (int s = 0; s < 14; ++s) {
            synth::SynthConfig cfg;
            cfg.width = 384;
            cfg.height = 384;
            cfg.pitch_um = 1.02;  // default physical extent at reduced pixel count
            cfg.seed = derive_seed(run, {0x6d697373, (uint64_t)s});
            auto sample = synth::generate_sample(cfg);
            auto ms = preprocess::missingness_stats(sample.heightmap, sample.labels);
            c.expect(std::fabs(ms.frac_total - cfg.dropout_frac) <= 0.005,
                     "dropout fraction off target in run " + std::to_string(run));
            c.expect(ms.dice_missing_vs_ink < 0.1,
                     "missingness-vs-ink dice >= 0.1 in run " + std::to_string(run));
            frac_ink.push_back(ms.frac_ink);
            frac_pap.push_back(ms.frac_papyrus);
        }
        auto w = stats::wilcoxon_signed_rank(frac_ink, frac_pap);
        if (w.p_value >= 0.05) ++nonsig;
    }
    c.expect(nonsig >= 18, "wilcoxon non-significant in only " + std::to_string(nonsig) + "/20 runs");
    if (c.ok) detail = std::to_string(nonsig) + "/20 runs non-significant";
    return c.ok;
}

// ---- criterion 8 -----------------------------------------------------------

bool lopo_heterogeneity(std::string& detail) {
    CheckList c{detail};
    if (!g_trend.ready) {
        c.expect(false, "trend pipeline did not run");
        return c.ok;
    }
    std::map<std::string, std::vector<double>> per_papyrus;
    std::map<std::string, int> row_count;
    for (const auto& r : g_trend.lopo.rows) {
        per_papyrus[r.papyrus_id].push_back(r.dice);
        ++row_count[r.sample_id];
    }
    c.expect(g_trend.lopo.rows.size() == 14, "pooled LOPO row count != 14");
    for (const auto& [id, n] : row_count)
        c.expect(n == 1, "sample " + id + " contributes " + std::to_string(n) + " rows");

    double weak = median_of(per_papyrus.at("P500P2"));
    std::string msg = "medians:";
    bool lowest = true;
    for (const auto& [pap, vals] : per_papyrus) {
        double med = median_of(vals);
        msg += " " + pap + "=" + io::format_double(std::round(med * 1000) / 1000);
        if (pap != "P500P2" && med <= weak) lowest = false;
    }
    c.expect(lowest, msg + " — P500P2 is not the lowest");
    if (c.ok) detail = msg;
    return c.ok;
}

// ---- criterion 9 -----------------------------------------------------------

bool determinism(std::string& detail) {
    CheckList c{detail};
    auto run_pipeline = [&](const fs::path& out) {
        cli::RunConfig cfg;
        cfg.out = out;
        cfg.seed = 9;
        cfg.synth_width = 192;
        cfg.synth_height = 192;
        cfg.synth_pitch_um = 2.04;
        cfg.ladder = {1, 4};
        cfg.epochs = 25;
        cfg.batch_px = 2048;
        cfg.max_px_per_sample = 4000;
        cfg.n_perm = 499;
        cli::cmd_synth(cfg);
        cfg.manifest = out / "corpus" / "manifest.csv";
        cli::cmd_run(cfg);
        cli::cmd_stats(cfg);
        cli::cmd_report(cfg);
    };
    fs::path a = "acceptance_det_a", b = "acceptance_det_b";
    fs::remove_all(a);
    fs::remove_all(b);
    run_pipeline(a);
    run_pipeline(b);
    for (const char* f :
         {"corpus/manifest.csv", "corpus/P248_s1.hmap", "missingness.csv", "results_matched.csv",
          "results_cross_res.csv", "results_zbin.csv", "results_lopo.csv", "stats_summary.csv",
          "stats.json", "report.svg", "report.md"}) {
        if (file_bytes(a / f) != file_bytes(b / f)) c.expect(false, std::string(f) + " differs");
    }
    return c.ok;
}

}  // namespace

int main() {
    Harness h;
    h.run(1, "Dice oracle equivalence", dice_oracle_equivalence);
    h.run(2, "Inpainting restoration", inpaint_restoration);
    h.run(3, "Resampling kernels", resampling_kernels);
    h.run(4, "Statistics oracles", statistics_oracles);
    h.run(5, "Gradient check", gradient_check);
    h.run(6, "Trend reproduction on the default synthetic corpus", trend_reproduction);
    h.run(7, "Missingness control", missingness_control);
    h.run(8, "LOPO heterogeneity", lopo_heterogeneity);
    h.run(9, "Pipeline determinism", determinism);
    if (h.failures) {
        std::printf("%d criterion(s) failed\n", h.failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
