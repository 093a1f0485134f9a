#include "reliefscan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "reliefscan/hmap_io.hpp"
#include "reliefscan/imageops.hpp"
#include "reliefscan/mathutil.hpp"
#include "reliefscan/parallel.hpp"
#include "reliefscan/rng.hpp"

namespace reliefscan::synth {

namespace {

constexpr double kPi = 3.14159265358979323846;
// multi-octave roughness: smoothing sigma and amplitude both double per octave,
// so block averaging at kernel n leaves relief comparable to n pixel pitches —
// the regime where z-binning with bin width = pitch stays benign
constexpr int kMaxOctaves = 6;
constexpr double kFeatherFrac = 0.25;  // edge transition band as a stroke-width fraction

double point_segment_dist(double px, double py, const StrokePoint& a, const StrokePoint& b) {
    double vx = b.x - a.x, vy = b.y - a.y;
    double wx = px - a.x, wy = py - a.y;
    double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? std::clamp((wx * vx + wy * vy) / len2, 0.0, 1.0) : 0.0;
    double dx = px - (a.x + t * vx), dy = py - (a.y + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

const std::vector<Glyph>& builtin_glyphs() {
    static const std::vector<Glyph> glyphs = {
        {"gamma", {{{0.28, 0.18}, {0.28, 0.82}}, {{0.28, 0.18}, {0.74, 0.18}}}},
        {"tau", {{{0.22, 0.2}, {0.78, 0.2}}, {{0.5, 0.2}, {0.5, 0.82}}}},
        {"lambda", {{{0.5, 0.18}, {0.26, 0.82}}, {{0.5, 0.18}, {0.74, 0.82}}}},
        {"eta",
         {{{0.3, 0.18}, {0.3, 0.82}}, {{0.7, 0.18}, {0.7, 0.82}}, {{0.3, 0.5}, {0.7, 0.5}}}},
        {"iota", {{{0.5, 0.18}, {0.5, 0.82}}}},
        {"epsilon",
         {{{0.32, 0.18}, {0.32, 0.82}},
          {{0.32, 0.18}, {0.7, 0.18}},
          {{0.32, 0.5}, {0.64, 0.5}},
          {{0.32, 0.82}, {0.7, 0.82}}}},
        {"pi",
         {{{0.22, 0.2}, {0.78, 0.2}}, {{0.32, 0.2}, {0.32, 0.82}}, {{0.68, 0.2}, {0.68, 0.82}}}},
        {"kappa",
         {{{0.3, 0.18}, {0.3, 0.82}}, {{0.7, 0.2}, {0.3, 0.52}}, {{0.32, 0.52}, {0.7, 0.82}}}},
    };
    return glyphs;
}

void validate(const SynthConfig& cfg) {
    if (cfg.width < 32 || cfg.height < 32)
        throw std::invalid_argument("synth canvas must be at least 32x32");
    if (!(cfg.pitch_um > 0.0)) throw std::invalid_argument("synth pitch_um must be > 0");
    auto nonneg = [](double v, const char* name) {
        if (!(v >= 0.0)) throw std::invalid_argument(std::string("synth ") + name + " must be >= 0");
    };
    nonneg(cfg.fiber_period_um, "fiber_period_um");
    nonneg(cfg.fiber_amp_um, "fiber_amp_um");
    nonneg(cfg.tilt_um_per_mm, "tilt_um_per_mm");
    nonneg(cfg.curvature_um_per_mm2, "curvature_um_per_mm2");
    nonneg(cfg.roughness_rms_um, "roughness_rms_um");
    nonneg(cfg.ink_depression_um, "ink_depression_um");
    nonneg(cfg.stroke_width_um, "stroke_width_um");
    if (!(cfg.ink_smoothing_factor >= 0.0 && cfg.ink_smoothing_factor <= 1.0))
        throw std::invalid_argument("synth ink_smoothing_factor must be in [0,1]");
    if (!(cfg.dropout_frac >= 0.0 && cfg.dropout_frac < 0.5))
        throw std::invalid_argument("synth dropout_frac must be in [0, 0.5)");
    if (cfg.glyph != "auto") {
        const auto& gs = builtin_glyphs();
        if (std::none_of(gs.begin(), gs.end(), [&](const Glyph& g) { return g.name == cfg.glyph; }))
            throw std::invalid_argument("unknown glyph '" + cfg.glyph + "'");
    }
}

SynthSample generate_sample(const SynthConfig& cfg) {
    validate(cfg);
    return generate_sample(cfg, Glyph{});  // builtin selection happens inside
}

SynthSample generate_sample(const SynthConfig& cfg, const Glyph& custom) {
    validate(cfg);
    Rng rng(cfg.seed);

    const int W = cfg.width, H = cfg.height;
    const size_t N = static_cast<size_t>(W) * H;
    const double pitch = cfg.pitch_um;
    const double w_um = W * pitch, h_um = H * pitch;

    // nuisance draws, fixed order
    const double tilt_theta = rng.uniform(0.0, 2.0 * kPi);
    const double tilt_scale = rng.uniform(0.7, 1.3);
    const double bow_sign = rng.coin() ? 1.0 : -1.0;
    const double bow_cx = w_um * rng.uniform(0.25, 0.75);
    const double bow_cy = h_um * rng.uniform(0.25, 0.75);
    const double bow_scale = rng.uniform(0.7, 1.3);
    const double fiber_phase_v = rng.uniform(0.0, 2.0 * kPi);
    const double fiber_phase_h = rng.uniform(0.0, 2.0 * kPi);
    const double fiber_jitter = rng.uniform(0.92, 1.08);
    const double fiber_amp_jitter = rng.uniform(0.85, 1.15);
    const double rough_jitter = rng.uniform(0.88, 1.12);

    const Glyph* glyph = &custom;
    if (custom.strokes.empty()) {
        const auto& gs = builtin_glyphs();
        if (cfg.glyph == "auto") {
            glyph = &gs[rng.below(gs.size())];
        } else {
            for (const auto& g : gs)
                if (g.name == cfg.glyph) glyph = &g;
        }
    }

    // glyph skeleton in µm: unit square scaled to a centered box
    const double box = 0.82 * std::min(w_um, h_um);
    const double off_x = (w_um - box) / 2.0, off_y = (h_um - box) / 2.0;
    std::vector<std::vector<StrokePoint>> strokes;
    for (const auto& poly : glyph->strokes) {
        std::vector<StrokePoint> p;
        for (const auto& q : poly) {
            StrokePoint s{off_x + q.x * box, off_y + q.y * box};
            if (s.x < 0.0 || s.x > w_um || s.y < 0.0 || s.y > h_um)
                throw std::invalid_argument("stroke skeleton outside canvas");
            p.push_back(s);
        }
        strokes.push_back(std::move(p));
    }

    // roughness: octave stack of smoothed white noise; layer k has blur sigma 2^k px
    // and RMS roughness_rms_um * 2^k. Ink smoothing acts fully on octaves at or
    // below sigma 2 px and not at all from sigma 8 px up: ink fills microrelief but
    // leaves the larger valleys and hills of the sheet untouched.
    std::vector<double> rough(N, 0.0);      // papyrus-side sum
    std::vector<double> rough_ink(N, 0.0);  // ink-side sum (per-octave multipliers)
    const double rough_base = cfg.roughness_rms_um * rough_jitter;
    if (rough_base > 0.0) {
        const int min_dim = std::min(W, H);
        int max_sigma = 0;
        for (int k = 0; k < kMaxOctaves; ++k) {
            int sigma = 1 << k;
            if (sigma * 8 > min_dim) break;  // keep octaves well below canvas scale
            max_sigma = sigma;
        }
        // noise is synthesized on a padded canvas and cropped, so the kept region
        // is stationary: no inflated relief near the map borders
        const int pad = 3 * max_sigma;
        const int PW = W + 2 * pad, PH = H + 2 * pad;
        const size_t PN = static_cast<size_t>(PW) * PH;
        std::vector<double> noise(PN), smoothed(PN);
        for (int k = 0; max_sigma > 0 && k < kMaxOctaves; ++k) {
            const double sigma = static_cast<double>(1 << k);
            if (sigma > max_sigma) break;
            for (double& v : noise) v = rng.normal();
            img::gaussian_blur(noise.data(), smoothed.data(), PW, PH, sigma);
            double mean = 0.0, var = 0.0;
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x) mean += smoothed[size_t(y + pad) * PW + (x + pad)];
            mean /= double(N);
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x) {
                    double d = smoothed[size_t(y + pad) * PW + (x + pad)] - mean;
                    var += d * d;
                }
            var /= double(N);
            if (!(var > 0.0)) continue;
            double scale = rough_base * sigma / std::sqrt(var);
            double fade = std::clamp((std::log2(sigma) - 1.0) / 10.0, 0.0, 1.0);
            double ink_mult = cfg.ink_smoothing_factor + (1.0 - cfg.ink_smoothing_factor) * fade;
            for (int y = 0; y < H; ++y) {
                for (int x = 0; x < W; ++x) {
                    size_t i = static_cast<size_t>(y) * W + x;
                    double v = (smoothed[size_t(y + pad) * PW + (x + pad)] - mean) * scale;
                    rough[i] += v;
                    rough_ink[i] += v * ink_mult;
                }
            }
        }
    }

    const double tilt = cfg.tilt_um_per_mm * tilt_scale / 1000.0;           // µm per µm
    const double curv = cfg.curvature_um_per_mm2 * bow_scale * bow_sign / 1e6;  // µm per µm²
    const double tx = std::cos(tilt_theta) * tilt, ty = std::sin(tilt_theta) * tilt;
    const double period_v = cfg.fiber_period_um * fiber_jitter;
    const double period_h = cfg.fiber_period_um * fiber_jitter * 1.09;
    const double amp_v = cfg.fiber_amp_um * fiber_amp_jitter;
    const double amp_h = cfg.fiber_amp_um * fiber_amp_jitter * 0.7;
    const double depression = cfg.ink_depression_um;
    const double half_w = cfg.stroke_width_um / 2.0;
    const double feather = kFeatherFrac * cfg.stroke_width_um;  // transition band width

    HeightMap hm;
    hm.width = W;
    hm.height = H;
    hm.pitch_um = pitch;
    hm.z.resize(N);
    hm.meta["letter"] = glyph->name;
    hm.meta["seed"] = std::to_string(cfg.seed);
    LabelMask labels{W, H, std::vector<uint8_t>(N, 0)};

    for (int y = 0; y < H; ++y) {
        const double y_um = y * pitch;
        for (int x = 0; x < W; ++x) {
            const double x_um = x * pitch;
            size_t i = static_cast<size_t>(y) * W + x;

            double z = tx * x_um + ty * y_um;
            double rx = x_um - bow_cx, ry = y_um - bow_cy;
            z += curv * (rx * rx + ry * ry);
            if (period_v > 0.0) z += amp_v * std::fabs(std::sin(kPi * x_um / period_v + fiber_phase_v));
            if (period_h > 0.0) z += amp_h * std::fabs(std::sin(kPi * y_um / period_h + fiber_phase_h));

            double d = std::numeric_limits<double>::infinity();
            for (const auto& poly : strokes)
                for (size_t s = 0; s + 1 < poly.size(); ++s)
                    d = std::min(d, point_segment_dist(x_um, y_um, poly[s], poly[s + 1]));

            double depw = 0.0;
            if (d <= half_w) {
                depw = 1.0;
                labels.ink[i] = 1;
            } else if (d <= half_w + feather && feather > 0.0) {
                depw = 0.5 * (1.0 + std::cos(kPi * (d - half_w) / feather));
            }

            z += rough[i] + (rough_ink[i] - rough[i]) * depw;
            z -= depression * depw;
            hm.z[i] = z;
        }
    }

    // dropout: exact count, uniform over all pixels, independent of ink
    size_t k = static_cast<size_t>(round_half_away(cfg.dropout_frac * static_cast<double>(N)));
    if (k > 0) {
        std::vector<uint32_t> idx(N);
        std::iota(idx.begin(), idx.end(), 0u);
        for (size_t j = 0; j < k; ++j) {
            size_t pick = j + static_cast<size_t>(rng.below(N - j));
            std::swap(idx[j], idx[pick]);
            hm.z[idx[j]] = missing_value();
        }
    }

    return {std::move(hm), std::move(labels)};
}

std::vector<PapyrusSpec> default_papyri() {
    return {
        {"P248", 5, 1.0, 1.0, 1.0, -1.0},
        {"P250", 5, 1.12, 0.92, 1.08, -1.0},
        {"P500P2", 4, 0.94, 1.05, 0.55, 0.7},
    };
}

DatasetManifest generate_corpus(const SynthConfig& base, const std::vector<PapyrusSpec>& papyri,
                                const std::filesystem::path& out_dir, int n_per_papyrus) {
    validate(base);
    if (papyri.size() < 2)
        throw std::invalid_argument("generate_corpus requires at least 2 papyri");
    size_t total = 0;
    for (const auto& p : papyri) {
        int n = p.n_samples > 0 ? p.n_samples : n_per_papyrus;
        if (n < 0) throw std::invalid_argument("negative sample count for papyrus " + p.id);
        total += static_cast<size_t>(n);
    }
    if (total == 0) throw std::invalid_argument("generate_corpus: empty manifest (no samples requested)");

    std::filesystem::create_directories(out_dir);

    struct Job {
        SynthConfig cfg;
        ManifestEntry entry;
    };
    std::vector<Job> jobs;
    size_t global_idx = 0;
    for (size_t pi = 0; pi < papyri.size(); ++pi) {
        const auto& spec = papyri[pi];
        int n = spec.n_samples > 0 ? spec.n_samples : n_per_papyrus;
        for (int s = 0; s < n; ++s, ++global_idx) {
            SynthConfig cfg = base;
            cfg.seed = derive_seed(base.seed, {0x01, pi, static_cast<uint64_t>(global_idx)});
            cfg.fiber_period_um *= spec.fiber_period_scale;
            cfg.roughness_rms_um *= spec.roughness_scale;
            cfg.ink_depression_um *= spec.ink_depression_scale;
            if (spec.ink_smoothing_override >= 0.0)
                cfg.ink_smoothing_factor = spec.ink_smoothing_override;
            std::string sample_id = spec.id + "_s" + std::to_string(s + 1);
            ManifestEntry e;
            e.sample_id = sample_id;
            e.papyrus_id = spec.id;
            e.heightmap_path = out_dir / (sample_id + ".hmap");
            e.label_path = out_dir / (sample_id + ".pgm");
            jobs.push_back({cfg, std::move(e)});
        }
    }

    parallel_for(jobs.size(), [&](size_t j) {
        auto& job = jobs[j];
        SynthSample sample = generate_sample(job.cfg);
        sample.heightmap.meta["papyrus"] = job.entry.papyrus_id;
        job.entry.letter = sample.heightmap.meta["letter"];
        io::write_heightmap(sample.heightmap, job.entry.heightmap_path);
        io::write_mask(sample.labels, job.entry.label_path);
    });

    DatasetManifest manifest;
    for (auto& j : jobs) manifest.entries.push_back(std::move(j.entry));
    io::write_manifest(manifest, out_dir / "manifest.csv");
    return manifest;
}

}  // namespace reliefscan::synth
