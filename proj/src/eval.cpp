#include "reliefscan/eval.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "reliefscan/hmap_io.hpp"
#include "reliefscan/parallel.hpp"
#include "reliefscan/rng.hpp"

namespace reliefscan::eval {

double dice(const LabelMask& a, const LabelMask& b) {
    if (a.width != b.width || a.height != b.height || a.ink.size() != b.ink.size())
        throw std::invalid_argument("dice: dimension mismatch");
    size_t na = 0, nb = 0, inter = 0;
    for (size_t i = 0; i < a.ink.size(); ++i) {
        bool av = a.ink[i] != 0, bv = b.ink[i] != 0;
        na += av;
        nb += bv;
        inter += (av && bv);
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

int FoldPlan::fold_of(const std::string& sample_id) const {
    auto it = assignment.find(sample_id);
    if (it == assignment.end())
        throw std::invalid_argument("fold plan does not cover sample '" + sample_id + "'");
    return it->second;
}

FoldPlan make_folds(const DatasetManifest& manifest, FoldKind kind, uint64_t seed) {
    FoldPlan plan;
    plan.kind = kind;
    plan.seed = seed;
    if (kind == FoldKind::cv5) {
        const int k = 5;
        if (manifest.entries.size() < static_cast<size_t>(k))
            throw std::invalid_argument("make_folds: fewer samples than folds");
        std::vector<std::string> ids;
        for (const auto& e : manifest.entries) ids.push_back(e.sample_id);
        Rng rng(derive_seed(seed, {0x666f6c64}));
        rng.shuffle(ids);
        for (size_t i = 0; i < ids.size(); ++i) plan.assignment[ids[i]] = static_cast<int>(i % k);
        plan.n_folds = k;
        for (int f = 0; f < k; ++f) plan.fold_labels.push_back(std::to_string(f));
    } else {
        auto papyri = manifest.papyrus_ids();
        std::sort(papyri.begin(), papyri.end());
        if (papyri.size() < 2) throw std::invalid_argument("make_folds: lopo requires >= 2 papyri");
        plan.n_folds = static_cast<int>(papyri.size());
        plan.fold_labels = papyri;
        for (const auto& e : manifest.entries) {
            auto it = std::find(papyri.begin(), papyri.end(), e.papyrus_id);
            plan.assignment[e.sample_id] = static_cast<int>(it - papyri.begin());
        }
    }
    return plan;
}

void write_results_csv(const ResultTable& t, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write results: " + path.string());
    out << "sample_id,papyrus_id,regime,pitch_um,dice,fold,model_id\n";
    for (const auto& r : t.rows)
        out << r.sample_id << ',' << r.papyrus_id << ',' << r.regime << ','
            << io::format_double(r.pitch_um) << ',' << io::format_double(r.dice) << ',' << r.fold
            << ',' << r.model_id << "\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

ResultTable read_results_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open results: " + path.string());
    std::string line;
    if (!std::getline(in, line) ||
        (line != "sample_id,papyrus_id,regime,pitch_um,dice,fold,model_id" &&
         line != "sample_id,papyrus_id,regime,pitch_um,dice,fold,model_id\r"))
        throw std::runtime_error("bad results header in " + path.string());
    ResultTable t;
    auto parse_double = [&](const std::string& s) {
        double v = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size())
            throw std::runtime_error("bad numeric field '" + s + "' in " + path.string());
        return v;
    };
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> f;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                f.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur += c;
            }
        }
        f.push_back(cur);
        if (f.size() != 7) throw std::runtime_error("bad results row in " + path.string());
        ResultRow r;
        r.sample_id = f[0];
        r.papyrus_id = f[1];
        r.regime = f[2];
        r.pitch_um = parse_double(f[3]);
        r.dice = parse_double(f[4]);
        r.fold = static_cast<int>(parse_double(f[5]));
        r.model_id = f[6];
        t.rows.push_back(std::move(r));
    }
    return t;
}

namespace {

// seed fan-out tags (fixed offsets from the experiment seed)
constexpr uint64_t kTagModel = 0x6d6f64656c;   // per (train pitch, fold)
constexpr uint64_t kTagLopo = 0x6c6f706f;      // per held-out papyrus
constexpr uint64_t kTagPool = 0x706f6f6c;      // per (pitch, sample, variant)
constexpr uint64_t kTagAug = 0x617567;         // per (pitch, sample, copy)

}  // namespace

struct Engine::Impl {
    ExperimentConfig cfg;
    DatasetManifest manifest;

    struct SampleData {
        ManifestEntry entry;
        HeightMap inpainted;  // native grid, fully finite
        LabelMask labels;
    };
    std::vector<SampleData> samples;
    std::vector<preprocess::MissingnessStats> missing;
    FoldPlan cv5;

    // per-ladder-kernel prepared data
    struct PitchData {
        int n = 0;
        double pitch_um = 0.0;
        segment::FeatureConfig feat_cfg;
        std::vector<NormalizedImage> images;      // per sample, at this pitch
        std::vector<LabelMask> labels;            // per sample, majority-downsampled
        std::vector<segment::PixelPool> pools;    // per sample, training rows
    };
    std::map<int, PitchData> pitches;

    std::map<std::pair<int, int>, segment::SegmenterModel> models;  // (n, fold) -> model

    Impl(const DatasetManifest& m, const ExperimentConfig& c) : cfg(c), manifest(m) {
        samples.resize(m.entries.size());
        missing.resize(m.entries.size());
        parallel_for(
            m.entries.size(),
            [&](size_t i) {
                SampleData sd;
                sd.entry = m.entries[i];
                HeightMap raw = io::read_heightmap(sd.entry.heightmap_path);
                sd.labels = io::read_mask(sd.entry.label_path);
                if (sd.labels.width != raw.width || sd.labels.height != raw.height)
                    throw std::runtime_error("label/heightmap dimension mismatch for sample " +
                                             sd.entry.sample_id);
                missing[i] = preprocess::missingness_stats(raw, sd.labels);
                sd.inpainted = preprocess::inpaint_missing(raw, 3);
                samples[i] = std::move(sd);
            },
            cfg.threads);
        cv5 = make_folds(manifest, FoldKind::cv5, cfg.seed);
    }

    double native_pitch() const { return cfg.ladder.pitches_um.front(); }

    const PitchData& prepare_pitch(int n, double pitch_um) {
        auto it = pitches.find(n);
        if (it != pitches.end()) return it->second;

        PitchData pd;
        pd.n = n;
        pd.pitch_um = pitch_um;
        pd.images.resize(samples.size());
        pd.labels.resize(samples.size());
        pd.pools.resize(samples.size());

        // consistent feature config across samples: smallest coarse dims decide
        int min_dim = std::numeric_limits<int>::max();
        for (const auto& s : samples)
            min_dim = std::min(min_dim, std::min(s.inpainted.width / n, s.inpainted.height / n));
        if (min_dim < 1) throw std::runtime_error("ladder kernel larger than a corpus sample");
        pd.feat_cfg = segment::FeatureConfig::for_image(min_dim, min_dim);

        parallel_for(
            samples.size(),
            [&](size_t i) {
                HeightMap coarse = resample::block_downsample(samples[i].inpainted, n);
                pd.labels[i] = resample::downsample_mask(samples[i].labels, n);
                pd.images[i] = preprocess::normalize_u16(coarse);
                pd.pools[i] = build_pool(pd, i);
            },
            cfg.threads);

        return pitches.emplace(n, std::move(pd)).first->second;
    }

    segment::PixelPool build_pool(const PitchData& pd, size_t sample_idx) {
        segment::PixelPool pool;
        pool.feature_count = pd.feat_cfg.feature_count();
        const int copies = cfg.hyper.augment_copies;
        for (int copy = 0; copy <= copies; ++copy) {
            NormalizedImage aug_img;
            LabelMask aug_lab;
            const NormalizedImage* img = &pd.images[sample_idx];
            const LabelMask* lab = &pd.labels[sample_idx];
            if (copy > 0) {
                auto [ai, al] = segment::augment(
                    *img, *lab,
                    derive_seed(cfg.seed, {kTagAug, (uint64_t)pd.n, sample_idx, (uint64_t)copy}));
                aug_img = std::move(ai);
                aug_lab = std::move(al);
                img = &aug_img;
                lab = &aug_lab;
            }
            segment::FeatureStack fs = segment::extract_features(*img, pd.feat_cfg);
            const size_t npx = fs.pixels();
            const size_t cap = cfg.hyper.max_px_per_sample > 0
                                   ? static_cast<size_t>(cfg.hyper.max_px_per_sample)
                                   : npx;
            if (npx <= cap) {
                for (size_t p = 0; p < npx; ++p) pool.append(fs.row(p), lab->ink[p]);
            } else {
                Rng rng(derive_seed(cfg.seed,
                                    {kTagPool, (uint64_t)pd.n, sample_idx, (uint64_t)copy}));
                std::vector<uint32_t> idx(npx);
                std::iota(idx.begin(), idx.end(), 0u);
                for (size_t j = 0; j < cap; ++j) {
                    size_t pick = j + static_cast<size_t>(rng.below(npx - j));
                    std::swap(idx[j], idx[pick]);
                    pool.append(fs.row(idx[j]), lab->ink[idx[j]]);
                }
            }
        }
        return pool;
    }

    void train_cv5_models(int n) {
        PitchData& pd = pitches.at(n);
        std::vector<int> want;
        for (int f = 0; f < cv5.n_folds; ++f)
            if (!models.count({n, f})) want.push_back(f);
        if (want.empty()) return;
        std::vector<segment::SegmenterModel> trained(want.size());
        parallel_for(
            want.size(),
            [&](size_t i) {
                segment::PixelPool pool;
                pool.feature_count = pd.feat_cfg.feature_count();
                for (size_t s = 0; s < samples.size(); ++s) {
                    if (cv5.fold_of(samples[s].entry.sample_id) == want[i]) continue;
                    const auto& p = pd.pools[s];
                    pool.x.insert(pool.x.end(), p.x.begin(), p.x.end());
                    pool.y.insert(pool.y.end(), p.y.begin(), p.y.end());
                    pool.rows += p.rows;
                }
                segment::TrainHyper hy = cfg.hyper;
                hy.seed = derive_seed(cfg.seed, {kTagModel, (uint64_t)n, (uint64_t)want[i]});
                trained[i] = segment::train_pool(pool, pd.feat_cfg, pd.pitch_um, hy);
            },
            cfg.threads);
        for (size_t i = 0; i < want.size(); ++i)
            models.emplace(std::make_pair(n, want[i]), std::move(trained[i]));
        // training pools for coarse pitches are no longer needed once every fold
        // model exists; the native pools stay for the LOPO regime
        if (n != cfg.ladder.kernels.front())
            for (auto& pool : pd.pools) pool = segment::PixelPool{};
    }
};

Engine::Engine(const DatasetManifest& manifest, const ExperimentConfig& cfg)
    : impl_(std::make_unique<Impl>(manifest, cfg)) {}

Engine::~Engine() = default;

const std::vector<preprocess::MissingnessStats>& Engine::missingness() const {
    return impl_->missing;
}

const FoldPlan& Engine::cv_plan() const { return impl_->cv5; }

ResultTable Engine::run_matched() {
    auto& im = *impl_;
    ResultTable table;
    for (size_t li = 0; li < im.cfg.ladder.kernels.size(); ++li) {
        const int n = im.cfg.ladder.kernels[li];
        const double pitch = im.cfg.ladder.pitches_um[li];
        const auto& pd = im.prepare_pitch(n, pitch);
        im.train_cv5_models(n);

        std::vector<double> scores(im.samples.size());
        parallel_for(
            im.samples.size(),
            [&](size_t i) {
                const auto& s = im.samples[i];
                int fold = im.cv5.fold_of(s.entry.sample_id);
                const auto& model = im.models.at({n, fold});  // trained without this fold
                auto pred = segment::predict(model, pd.images[i]);
                scores[i] = dice(pred.as_labels(), pd.labels[i]);
            },
            im.cfg.threads);
        for (size_t i = 0; i < im.samples.size(); ++i) {
            const auto& e = im.samples[i].entry;
            int fold = im.cv5.fold_of(e.sample_id);
            table.rows.push_back({e.sample_id, e.papyrus_id, "matched", pitch, scores[i], fold,
                                  "cv5_n" + std::to_string(n) + "_fold" + std::to_string(fold)});
        }
    }
    return table;
}

ResultTable Engine::run_cross_res() {
    auto& im = *impl_;
    const int native_n = im.cfg.ladder.kernels.front();
    if (native_n != 1)
        throw std::invalid_argument("cross_res expects the ladder to start at the native kernel 1");
    im.prepare_pitch(1, im.cfg.ladder.pitches_um.front());
    im.train_cv5_models(1);

    ResultTable table;
    for (size_t li = 0; li < im.cfg.ladder.kernels.size(); ++li) {
        const int n = im.cfg.ladder.kernels[li];
        const double pitch = im.cfg.ladder.pitches_um[li];
        std::vector<double> scores(im.samples.size());
        parallel_for(
            im.samples.size(),
            [&](size_t i) {
                const auto& s = im.samples[i];
                int fold = im.cv5.fold_of(s.entry.sample_id);
                const auto& model = im.models.at({1, fold});
                HeightMap rt = resample::degrade_roundtrip(s.inpainted, n);
                LabelMask lab = resample::crop_mask(s.labels, rt.width, rt.height);
                auto img = preprocess::normalize_u16(rt);
                auto pred = segment::predict(model, img);
                scores[i] = dice(pred.as_labels(), lab);
            },
            im.cfg.threads);
        for (size_t i = 0; i < im.samples.size(); ++i) {
            const auto& e = im.samples[i].entry;
            int fold = im.cv5.fold_of(e.sample_id);
            table.rows.push_back({e.sample_id, e.papyrus_id, "cross_res", pitch, scores[i], fold,
                                  "cv5_n1_fold" + std::to_string(fold)});
        }
    }
    return table;
}

ResultTable Engine::run_zbin() {
    auto& im = *impl_;
    ResultTable table;
    for (size_t li = 0; li < im.cfg.ladder.kernels.size(); ++li) {
        const int n = im.cfg.ladder.kernels[li];
        const double pitch = im.cfg.ladder.pitches_um[li];
        const auto& pd = im.prepare_pitch(n, pitch);
        im.train_cv5_models(n);  // same fold-wise models as run_matched

        std::vector<double> scores(im.samples.size());
        parallel_for(
            im.samples.size(),
            [&](size_t i) {
                const auto& s = im.samples[i];
                int fold = im.cv5.fold_of(s.entry.sample_id);
                const auto& model = im.models.at({n, fold});
                HeightMap coarse = resample::block_downsample(s.inpainted, n);
                HeightMap binned = resample::zbin(coarse, pitch);
                auto img = preprocess::normalize_u16(binned);
                auto pred = segment::predict(model, img);
                scores[i] = dice(pred.as_labels(), pd.labels[i]);
            },
            im.cfg.threads);
        for (size_t i = 0; i < im.samples.size(); ++i) {
            const auto& e = im.samples[i].entry;
            int fold = im.cv5.fold_of(e.sample_id);
            table.rows.push_back({e.sample_id, e.papyrus_id, "zbin", pitch, scores[i], fold,
                                  "cv5_n" + std::to_string(n) + "_fold" + std::to_string(fold)});
        }
    }
    return table;
}

ResultTable Engine::run_lopo() {
    auto& im = *impl_;
    FoldPlan plan = make_folds(im.manifest, FoldKind::lopo, im.cfg.seed);
    const double pitch = im.cfg.ladder.pitches_um.front();
    const auto& pd = im.prepare_pitch(im.cfg.ladder.kernels.front(), pitch);

    std::vector<segment::SegmenterModel> fold_models(plan.n_folds);
    parallel_for(
        static_cast<size_t>(plan.n_folds),
        [&](size_t f) {
            segment::PixelPool pool;
            pool.feature_count = pd.feat_cfg.feature_count();
            for (size_t s = 0; s < im.samples.size(); ++s) {
                if (plan.fold_of(im.samples[s].entry.sample_id) == static_cast<int>(f)) continue;
                const auto& p = pd.pools[s];
                pool.x.insert(pool.x.end(), p.x.begin(), p.x.end());
                pool.y.insert(pool.y.end(), p.y.begin(), p.y.end());
                pool.rows += p.rows;
            }
            segment::TrainHyper hy = im.cfg.hyper;
            hy.seed = derive_seed(im.cfg.seed, {kTagLopo, f});
            fold_models[f] = segment::train_pool(pool, pd.feat_cfg, pd.pitch_um, hy);
        },
        im.cfg.threads);

    std::vector<double> scores(im.samples.size());
    parallel_for(
        im.samples.size(),
        [&](size_t i) {
            int fold = plan.fold_of(im.samples[i].entry.sample_id);
            auto pred = segment::predict(fold_models[fold], pd.images[i]);
            scores[i] = dice(pred.as_labels(), pd.labels[i]);
        },
        im.cfg.threads);

    ResultTable table;
    for (size_t i = 0; i < im.samples.size(); ++i) {
        const auto& e = im.samples[i].entry;
        int fold = plan.fold_of(e.sample_id);
        table.rows.push_back({e.sample_id, e.papyrus_id, "lopo", pitch, scores[i], fold,
                              "lopo_" + plan.fold_labels[fold]});
    }
    return table;
}

ResultTable run_matched(const DatasetManifest& m, const ExperimentConfig& cfg) {
    return Engine(m, cfg).run_matched();
}
ResultTable run_cross_res(const DatasetManifest& m, const ExperimentConfig& cfg) {
    return Engine(m, cfg).run_cross_res();
}
ResultTable run_zbin(const DatasetManifest& m, const ExperimentConfig& cfg) {
    return Engine(m, cfg).run_zbin();
}
ResultTable run_lopo(const DatasetManifest& m, const ExperimentConfig& cfg) {
    return Engine(m, cfg).run_lopo();
}

}  // namespace reliefscan::eval
