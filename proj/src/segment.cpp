#include "reliefscan/segment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "reliefscan/imageops.hpp"
#include "reliefscan/mathutil.hpp"
#include "reliefscan/rng.hpp"

namespace reliefscan::segment {

namespace {

constexpr double kDiceSmooth = 1.0;

double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

// log(1 + e^x) without overflow
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x))); }

}  // namespace

int FeatureConfig::largest_support() const {
    int s = 0;
    for (int sc : scales_px) s = std::max(s, img::gaussian_support(sc));
    return s;
}

FeatureConfig FeatureConfig::for_image(int width, int height) {
    FeatureConfig def;
    FeatureConfig out;
    out.scales_px.clear();
    int min_dim = std::min(width, height);
    for (int s : def.scales_px)
        if (img::gaussian_support(s) <= min_dim) out.scales_px.push_back(s);
    if (out.scales_px.empty()) out.scales_px.push_back(1);
    return out;
}

FeatureStack extract_features(const NormalizedImage& image, const FeatureConfig& cfg) {
    if (image.width < 1 || image.height < 1 ||
        image.u16.size() != static_cast<size_t>(image.width) * image.height)
        throw std::invalid_argument("extract_features: malformed image");
    if (cfg.scales_px.empty()) throw std::invalid_argument("extract_features: no scales");
    if (std::min(image.width, image.height) < cfg.largest_support())
        throw std::invalid_argument("extract_features: image smaller than largest kernel support");

    const int w = image.width, h = image.height;
    const size_t n = static_cast<size_t>(w) * h;
    const int F = cfg.feature_count();

    FeatureStack stack;
    stack.width = w;
    stack.height = h;
    stack.config = cfg;
    stack.data.resize(n * F);

    std::vector<float> base(n);
    for (size_t i = 0; i < n; ++i) base[i] = static_cast<float>(image.u16[i]) / 65535.0f;
    for (size_t i = 0; i < n; ++i) stack.data[i * F] = base[i];

    std::vector<float> smooth(n), resid(n), resid2(n), mu(n), mu2(n);
    auto clampi = [](int v, int lim) { return v < 0 ? 0 : (v >= lim ? lim - 1 : v); };

    std::vector<double> wx, wy;
    for (size_t si = 0; si < cfg.scales_px.size(); ++si) {
        const double sigma = cfg.scales_px[si];
        img::gaussian_blur(base.data(), smooth.data(), w, h, sigma);

        // residual roughness: local std of (base - smooth) over the same Gaussian
        // window; moments use zero-padded blurs renormalized by the in-image kernel
        // mass so border pixels carry no systematic bias
        for (size_t i = 0; i < n; ++i) {
            resid[i] = base[i] - smooth[i];
            resid2[i] = resid[i] * resid[i];
        }
        img::gaussian_blur_zeropad(resid.data(), mu.data(), w, h, sigma, &wx, &wy);
        img::gaussian_blur_zeropad(resid2.data(), mu2.data(), w, h, sigma);
        for (int y = 0; y < h; ++y) {
            const double wyv = wy[y];
            for (int x = 0; x < w; ++x) {
                const double mass = wx[x] * wyv;
                size_t i = static_cast<size_t>(y) * w + x;
                mu[i] = static_cast<float>(mu[i] / mass);
                mu2[i] = static_cast<float>(mu2[i] / mass);
            }
        }

        const int f_smooth = 1 + static_cast<int>(si) * 4;
        const int f_grad = f_smooth + 1;
        const int f_rough = f_smooth + 2;
        const int f_lap = f_smooth + 3;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                size_t i = static_cast<size_t>(y) * w + x;
                float* row = stack.data.data() + i * F;
                row[f_smooth] = smooth[i];
                const size_t xm = static_cast<size_t>(y) * w + clampi(x - 1, w);
                const size_t xp = static_cast<size_t>(y) * w + clampi(x + 1, w);
                const size_t ym = static_cast<size_t>(clampi(y - 1, h)) * w + x;
                const size_t yp = static_cast<size_t>(clampi(y + 1, h)) * w + x;
                const double gx = (smooth[xp] - smooth[xm]) / 2.0;
                const double gy = (smooth[yp] - smooth[ym]) / 2.0;
                row[f_grad] = static_cast<float>(std::sqrt(gx * gx + gy * gy));
                const double var = std::max(0.0, double(mu2[i]) - double(mu[i]) * double(mu[i]));
                row[f_rough] = static_cast<float>(std::sqrt(var));
                row[f_lap] = static_cast<float>(double(smooth[xp]) + double(smooth[xm]) +
                                                double(smooth[yp]) + double(smooth[ym]) -
                                                4.0 * double(smooth[i]));
            }
        }
    }
    return stack;
}

void PixelPool::append(const float* features, uint8_t label) {
    x.insert(x.end(), features, features + feature_count);
    y.push_back(label ? 1 : 0);
    ++rows;
}

double composite_loss(std::span<const double> w, double b, const double* x, const uint8_t* y,
                      size_t n, size_t f) {
    if (n == 0) throw std::invalid_argument("composite_loss: empty batch");
    double ce = 0.0, inter = 0.0, psum = 0.0, gsum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double s = b;
        const double* xi = x + i * f;
        for (size_t j = 0; j < f; ++j) s += w[j] * xi[j];
        double p = sigmoid(s);
        ce += softplus(-s) + (y[i] ? 0.0 : s);
        inter += y[i] ? p : 0.0;
        psum += p;
        gsum += y[i] ? 1.0 : 0.0;
    }
    ce /= static_cast<double>(n);
    double dice_loss = 1.0 - (2.0 * inter + kDiceSmooth) / (psum + gsum + kDiceSmooth);
    return ce + dice_loss;
}

LossGrad composite_loss_grad(std::span<const double> w, double b, const double* x,
                             const uint8_t* y, size_t n, size_t f) {
    if (n == 0) throw std::invalid_argument("composite_loss_grad: empty batch");
    std::vector<double> p(n);
    double ce = 0.0, inter = 0.0, psum = 0.0, gsum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double s = b;
        const double* xi = x + i * f;
        for (size_t j = 0; j < f; ++j) s += w[j] * xi[j];
        p[i] = sigmoid(s);
        ce += softplus(-s) + (y[i] ? 0.0 : s);
        inter += y[i] ? p[i] : 0.0;
        psum += p[i];
        gsum += y[i] ? 1.0 : 0.0;
    }
    ce /= static_cast<double>(n);
    const double denom = psum + gsum + kDiceSmooth;
    const double num = 2.0 * inter + kDiceSmooth;
    double dice_loss = 1.0 - num / denom;

    LossGrad out;
    out.loss = ce + dice_loss;
    out.dw.assign(f, 0.0);
    // d(dice_loss)/dp_i = -(2*y_i*denom - num) / denom^2 ; dp/ds = p(1-p)
    // d(ce)/ds_i = (p_i - y_i)/n
    for (size_t i = 0; i < n; ++i) {
        const double yi = y[i] ? 1.0 : 0.0;
        const double dce = (p[i] - yi) / static_cast<double>(n);
        const double ddice = -(2.0 * yi * denom - num) / (denom * denom) * p[i] * (1.0 - p[i]);
        const double ds = dce + ddice;
        const double* xi = x + i * f;
        for (size_t j = 0; j < f; ++j) out.dw[j] += ds * xi[j];
        out.db += ds;
    }
    return out;
}

namespace {

struct Standardizer {
    std::vector<double> mean, std;

    void fit(const std::vector<float>& x, const std::vector<size_t>& rows, size_t f) {
        mean.assign(f, 0.0);
        std.assign(f, 0.0);
        for (size_t r : rows) {
            const float* xi = x.data() + r * f;
            for (size_t j = 0; j < f; ++j) mean[j] += xi[j];
        }
        for (size_t j = 0; j < f; ++j) mean[j] /= static_cast<double>(rows.size());
        for (size_t r : rows) {
            const float* xi = x.data() + r * f;
            for (size_t j = 0; j < f; ++j) {
                double d = xi[j] - mean[j];
                std[j] += d * d;
            }
        }
        for (size_t j = 0; j < f; ++j) {
            std[j] = std::sqrt(std[j] / static_cast<double>(rows.size()));
            if (!(std[j] > 0.0)) std[j] = 1.0;  // constant feature
        }
    }
};

void standardized_rows(const std::vector<float>& x, const std::vector<size_t>& rows, size_t f,
                       const Standardizer& st, std::vector<double>& out) {
    out.resize(rows.size() * f);
    for (size_t k = 0; k < rows.size(); ++k) {
        const float* xi = x.data() + rows[k] * f;
        for (size_t j = 0; j < f; ++j) out[k * f + j] = (xi[j] - st.mean[j]) / st.std[j];
    }
}

}  // namespace

SegmenterModel train_pool(const PixelPool& pool, const FeatureConfig& cfg, double train_pitch_um,
                          const TrainHyper& hyper) {
    const size_t f = static_cast<size_t>(pool.feature_count);
    if (pool.rows < 16) throw std::invalid_argument("train: too few pixels");
    if (f != static_cast<size_t>(cfg.feature_count()))
        throw std::invalid_argument("train: pool/config feature count mismatch");
    size_t pos = 0;
    for (uint8_t v : pool.y) pos += v;
    if (pos == 0 || pos == pool.rows)
        throw std::invalid_argument("train: single-class training set (both classes required)");

    Rng rng(derive_seed(hyper.seed, {0x7261696e}));  // training stream

    // shuffled row order; tail val_frac becomes the validation split
    std::vector<size_t> order(pool.rows);
    std::iota(order.begin(), order.end(), size_t{0});
    rng.shuffle(order);
    size_t n_val = static_cast<size_t>(static_cast<double>(pool.rows) * hyper.val_frac);
    n_val = std::min(n_val, pool.rows - 2);
    std::vector<size_t> train_rows(order.begin(), order.end() - n_val);
    std::vector<size_t> val_rows(order.end() - n_val, order.end());

    Standardizer st;
    st.fit(pool.x, train_rows, f);

    std::vector<double> xtr, xval;
    standardized_rows(pool.x, train_rows, f, st, xtr);
    standardized_rows(pool.x, val_rows, f, st, xval);
    std::vector<uint8_t> ytr(train_rows.size()), yval(val_rows.size());
    for (size_t i = 0; i < train_rows.size(); ++i) ytr[i] = pool.y[train_rows[i]];
    for (size_t i = 0; i < val_rows.size(); ++i) yval[i] = pool.y[val_rows[i]];

    // Adam
    std::vector<double> w(f, 0.0), m(f, 0.0), v(f, 0.0);
    double b = 0.0, mb = 0.0, vb = 0.0;
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long step = 0;

    const size_t batch = std::max<size_t>(1, static_cast<size_t>(hyper.batch_px));
    const size_t n_train = train_rows.size();
    std::vector<size_t> epoch_order(n_train);
    std::iota(epoch_order.begin(), epoch_order.end(), size_t{0});

    std::vector<double> bx(batch * f);
    std::vector<uint8_t> by(batch);

    SegmenterModel model;
    model.features = cfg;
    model.feat_mean = st.mean;
    model.feat_std = st.std;
    model.train_pitch_um = train_pitch_um;
    model.meta.seed = hyper.seed;
    model.meta.lr = hyper.lr;

    double best_val = std::numeric_limits<double>::infinity();
    std::vector<double> best_w = w;
    double best_b = b;
    int since_best = 0;

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        rng.shuffle(epoch_order);
        double epoch_loss = 0.0;
        size_t n_batches = 0;
        for (size_t start = 0; start < n_train; start += batch) {
            const size_t bn = std::min(batch, n_train - start);
            for (size_t i = 0; i < bn; ++i) {
                const size_t r = epoch_order[start + i];
                std::copy_n(xtr.data() + r * f, f, bx.data() + i * f);
                by[i] = ytr[r];
            }
            LossGrad g = composite_loss_grad(w, b, bx.data(), by.data(), bn, f);
            if (!std::isfinite(g.loss))
                throw std::runtime_error("train: non-finite loss at epoch " +
                                         std::to_string(epoch));
            epoch_loss += g.loss;
            ++n_batches;
            ++step;
            const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            for (size_t j = 0; j < f; ++j) {
                m[j] = beta1 * m[j] + (1.0 - beta1) * g.dw[j];
                v[j] = beta2 * v[j] + (1.0 - beta2) * g.dw[j] * g.dw[j];
                w[j] -= hyper.lr * (m[j] / corr1) / (std::sqrt(v[j] / corr2) + eps);
            }
            mb = beta1 * mb + (1.0 - beta1) * g.db;
            vb = beta2 * vb + (1.0 - beta2) * g.db * g.db;
            b -= hyper.lr * (mb / corr1) / (std::sqrt(vb / corr2) + eps);
        }
        model.meta.loss_curve.push_back(epoch_loss / static_cast<double>(n_batches));
        model.meta.epochs_run = epoch + 1;

        double val_loss = val_rows.empty()
                              ? model.meta.loss_curve.back()
                              : composite_loss(w, b, xval.data(), yval.data(), val_rows.size(), f);
        if (!std::isfinite(val_loss))
            throw std::runtime_error("train: non-finite validation loss at epoch " +
                                     std::to_string(epoch));
        if (val_loss < best_val - 1e-9) {
            best_val = val_loss;
            best_w = w;
            best_b = b;
            since_best = 0;
        } else if (++since_best >= hyper.patience) {
            break;  // early stop on validation-loss convergence
        }
    }

    model.weights = best_w;
    model.bias = best_b;
    model.meta.best_val_loss = best_val;
    return model;
}

SegmenterModel train(const std::vector<TrainSample>& samples, const TrainHyper& hyper) {
    if (samples.empty()) throw std::invalid_argument("train: no samples");
    FeatureConfig cfg = FeatureConfig::for_image(samples[0].img->width, samples[0].img->height);
    for (const auto& s : samples) {
        FeatureConfig c = FeatureConfig::for_image(s.img->width, s.img->height);
        if (c.scales_px.size() < cfg.scales_px.size()) cfg = c;
    }

    PixelPool pool;
    pool.feature_count = cfg.feature_count();
    for (size_t si = 0; si < samples.size(); ++si) {
        const auto& s = samples[si];
        if (s.labels->width != s.img->width || s.labels->height != s.img->height)
            throw std::invalid_argument("train: image/label dimension mismatch");
        for (int copy = 0; copy <= hyper.augment_copies; ++copy) {
            NormalizedImage aug_img;
            LabelMask aug_lab;
            const NormalizedImage* use_img = s.img;
            const LabelMask* use_lab = s.labels;
            if (copy > 0) {
                auto [ai, al] =
                    augment(*s.img, *s.labels, derive_seed(hyper.seed, {0x617567, si, (uint64_t)copy}));
                aug_img = std::move(ai);
                aug_lab = std::move(al);
                use_img = &aug_img;
                use_lab = &aug_lab;
            }
            FeatureStack fs = extract_features(*use_img, cfg);
            const size_t n = fs.pixels();
            if (hyper.max_px_per_sample > 0 &&
                n > static_cast<size_t>(hyper.max_px_per_sample)) {
                Rng srng(derive_seed(hyper.seed, {0x706f6f6c, si, (uint64_t)copy}));
                std::vector<uint32_t> idx(n);
                std::iota(idx.begin(), idx.end(), 0u);
                const size_t keep = static_cast<size_t>(hyper.max_px_per_sample);
                for (size_t j = 0; j < keep; ++j) {
                    size_t pick = j + static_cast<size_t>(srng.below(n - j));
                    std::swap(idx[j], idx[pick]);
                    pool.append(fs.row(idx[j]), use_lab->ink[idx[j]]);
                }
            } else {
                for (size_t i = 0; i < n; ++i) pool.append(fs.row(i), use_lab->ink[i]);
            }
        }
    }
    return train_pool(pool, cfg, samples[0].img->pitch_um, hyper);
}

PredictionMask predict(const SegmenterModel& model, const NormalizedImage& image) {
    FeatureStack fs = extract_features(image, model.features);
    const size_t f = static_cast<size_t>(model.features.feature_count());
    if (model.weights.size() != f || model.feat_mean.size() != f || model.feat_std.size() != f)
        throw std::invalid_argument("predict: model feature-count mismatch");

    PredictionMask out;
    out.width = image.width;
    out.height = image.height;
    const size_t n = fs.pixels();
    out.prob.resize(n);
    out.ink.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const float* xi = fs.row(i);
        double s = model.bias;
        for (size_t j = 0; j < f; ++j)
            s += model.weights[j] * ((xi[j] - model.feat_mean[j]) / model.feat_std[j]);
        float p = static_cast<float>(sigmoid(s));
        out.prob[i] = p;
        out.ink[i] = p >= 0.5f ? 1 : 0;
    }
    return out;
}

namespace {

// quarter-turns counterclockwise
template <typename GridT, typename GetT>
void rotate90_into(GridT& out, int in_w, int in_h, const GetT& get) {
    // output dims: in_h x in_w
    for (int y = 0; y < in_w; ++y)
        for (int x = 0; x < in_h; ++x) out[static_cast<size_t>(y) * in_h + x] = get(in_w - 1 - y, x);
}

}  // namespace

NormalizedImage flip_image(const NormalizedImage& in, bool horiz) {
    NormalizedImage out = in;
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x)
            out.u16[static_cast<size_t>(y) * in.width + x] =
                horiz ? in.at(in.width - 1 - x, y) : in.at(x, in.height - 1 - y);
    return out;
}

LabelMask flip_mask(const LabelMask& in, bool horiz) {
    LabelMask out = in;
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x)
            out.ink[static_cast<size_t>(y) * in.width + x] =
                horiz ? in.at(in.width - 1 - x, y) : in.at(x, in.height - 1 - y);
    return out;
}

NormalizedImage rotate90_image(const NormalizedImage& in) {
    NormalizedImage out = in;
    out.width = in.height;
    out.height = in.width;
    rotate90_into(out.u16, in.width, in.height, [&](int x, int y) { return in.at(x, y); });
    return out;
}

LabelMask rotate90_mask(const LabelMask& in) {
    LabelMask out;
    out.width = in.height;
    out.height = in.width;
    out.ink.resize(in.ink.size());
    rotate90_into(out.ink, in.width, in.height,
                  [&](int x, int y) { return static_cast<uint8_t>(in.at(x, y) ? 1 : 0); });
    return out;
}

std::pair<NormalizedImage, LabelMask> augment(const NormalizedImage& image, const LabelMask& labels,
                                              uint64_t seed, const AugmentParams& params) {
    if (labels.width != image.width || labels.height != image.height)
        throw std::invalid_argument("augment: image/label dimension mismatch");
    if (params.neutral()) return {image, labels};

    Rng rng(seed);
    NormalizedImage img = image;
    LabelMask lab = labels;

    if (params.flips) {
        if (rng.coin()) {
            img = flip_image(img, true);
            lab = flip_mask(lab, true);
        }
        if (rng.coin()) {
            img = flip_image(img, false);
            lab = flip_mask(lab, false);
        }
    }
    if (params.rotations) {
        uint64_t quarters = rng.below(4);
        for (uint64_t q = 0; q < quarters; ++q) {
            img = rotate90_image(img);
            lab = rotate90_mask(lab);
        }
    }

    const double scale = rng.uniform(params.intensity_lo, params.intensity_hi);

    // elastic warp: displacement taken as the curl of a coarse random potential,
    // so the field is divergence-free and label mass is preserved to first order
    const int g = std::max(2, params.elastic_grid);
    std::vector<double> psi(static_cast<size_t>(g) * g);
    for (auto& v : psi) v = rng.normal();

    const int w = img.width, h = img.height;
    NormalizedImage warped = img;
    LabelMask warped_lab = lab;
    auto clampi = [](int v, int lim) { return v < 0 ? 0 : (v >= lim ? lim - 1 : v); };
    auto potential = [&](double px, double py) {
        double gx = std::clamp(px, 0.0, double(w - 1)) / std::max(1, w - 1) * (g - 1);
        double gy = std::clamp(py, 0.0, double(h - 1)) / std::max(1, h - 1) * (g - 1);
        int x0 = std::min(static_cast<int>(gx), g - 2);
        int y0 = std::min(static_cast<int>(gy), g - 2);
        double fx = gx - x0, fy = gy - y0;
        double a = psi[static_cast<size_t>(y0) * g + x0];
        double bb = psi[static_cast<size_t>(y0) * g + x0 + 1];
        double c = psi[static_cast<size_t>(y0 + 1) * g + x0];
        double d = psi[static_cast<size_t>(y0 + 1) * g + x0 + 1];
        return (a * (1 - fx) + bb * fx) * (1 - fy) + (c * (1 - fx) + d * fx) * fy;
    };
    // control spacing sets the gradient scale of the interpolated potential
    const double spacing = static_cast<double>(std::max(w, h)) / (g - 1);
    const double gain = params.elastic_amp_px * spacing / 2.0;

    const bool do_warp = params.elastic_amp_px > 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double sxp = x, syp = y;
            if (do_warp) {
                sxp = x + gain * (potential(x, y + 1) - potential(x, y - 1)) / 2.0;
                syp = y - gain * (potential(x + 1, y) - potential(x - 1, y)) / 2.0;
            }
            double v;
            {
                int x0 = static_cast<int>(std::floor(sxp));
                int y0 = static_cast<int>(std::floor(syp));
                double fx = sxp - x0, fy = syp - y0;
                int x0c = clampi(x0, w), x1c = clampi(x0 + 1, w);
                int y0c = clampi(y0, h), y1c = clampi(y0 + 1, h);
                double top = img.at(x0c, y0c) * (1 - fx) + img.at(x1c, y0c) * fx;
                double bot = img.at(x0c, y1c) * (1 - fx) + img.at(x1c, y1c) * fx;
                v = top * (1 - fy) + bot * fy;
            }
            v = std::clamp(round_half_away(v * scale), 0.0, 65535.0);
            warped.u16[static_cast<size_t>(y) * w + x] = static_cast<uint16_t>(v);
            int nx = clampi(static_cast<int>(round_half_away(sxp)), w);
            int ny = clampi(static_cast<int>(round_half_away(syp)), h);
            warped_lab.ink[static_cast<size_t>(y) * w + x] = lab.at(nx, ny) ? 1 : 0;
        }
    }
    return {std::move(warped), std::move(warped_lab)};
}

void save_model(const SegmenterModel& model, const std::filesystem::path& path) {
    nlohmann::json j;
    j["format"] = "reliefscan-model";
    j["version"] = 1;
    j["scales_px"] = model.features.scales_px;
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    j["feat_mean"] = model.feat_mean;
    j["feat_std"] = model.feat_std;
    j["train_pitch_um"] = model.train_pitch_um;
    j["meta"] = {{"seed", model.meta.seed},
                 {"epochs_run", model.meta.epochs_run},
                 {"lr", model.meta.lr},
                 {"best_val_loss", model.meta.best_val_loss},
                 {"loss_curve", model.meta.loss_curve}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model: " + path.string());
    out << j.dump(2) << "\n";
}

SegmenterModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model: " + path.string());
    nlohmann::json j;
    in >> j;
    if (j.value("format", "") != "reliefscan-model" || j.value("version", 0) != 1)
        throw std::runtime_error("unsupported model file: " + path.string());
    SegmenterModel m;
    m.features.scales_px = j.at("scales_px").get<std::vector<int>>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.feat_mean = j.at("feat_mean").get<std::vector<double>>();
    m.feat_std = j.at("feat_std").get<std::vector<double>>();
    m.train_pitch_um = j.at("train_pitch_um").get<double>();
    const auto& meta = j.at("meta");
    m.meta.seed = meta.at("seed").get<uint64_t>();
    m.meta.epochs_run = meta.at("epochs_run").get<int>();
    m.meta.lr = meta.at("lr").get<double>();
    m.meta.best_val_loss = meta.at("best_val_loss").get<double>();
    m.meta.loss_curve = meta.at("loss_curve").get<std::vector<double>>();
    if (m.weights.size() != static_cast<size_t>(m.features.feature_count()))
        throw std::runtime_error("model weight count does not match feature config");
    return m;
}

}  // namespace reliefscan::segment
