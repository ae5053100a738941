#include "factorizenet/train.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

namespace fznet {

void TrainConfig::validate() const {
    if (epochs < 1 || batch_size < 1) throw ConfigError("epochs and batch_size must be >= 1");
    if (base_lr <= 0 || momentum < 0 || momentum >= 1) throw ConfigError("bad lr/momentum");
    if (lr_drop_factor <= 0) throw ConfigError("lr_drop_factor must be > 0");
    for (std::size_t i = 0; i < lr_drop_epochs.size(); ++i) {
        if (lr_drop_epochs[i] < 0 || lr_drop_epochs[i] >= epochs)
            throw ConfigError("lr drop epoch " + std::to_string(lr_drop_epochs[i]) +
                              " outside [0, epochs)");
        if (i > 0 && lr_drop_epochs[i] <= lr_drop_epochs[i - 1])
            throw ConfigError("lr drop epochs must be strictly increasing");
    }
}

namespace {

// Bilinear sample with edge-replicate fill.
inline float sample_bilinear(const float* plane, int h, int w, float y, float x) {
    const float yc = std::min(std::max(y, 0.0f), static_cast<float>(h - 1));
    const float xc = std::min(std::max(x, 0.0f), static_cast<float>(w - 1));
    const int y0 = static_cast<int>(yc);
    const int x0 = static_cast<int>(xc);
    const int y1 = std::min(y0 + 1, h - 1);
    const int x1 = std::min(x0 + 1, w - 1);
    const float fy = yc - static_cast<float>(y0);
    const float fx = xc - static_cast<float>(x0);
    const float top = plane[y0 * w + x0] * (1.0f - fx) + plane[y0 * w + x1] * fx;
    const float bot = plane[y1 * w + x0] * (1.0f - fx) + plane[y1 * w + x1] * fx;
    return top * (1.0f - fy) + bot * fy;
}

}  // namespace

Tensor augment_batch(const Tensor& batch, const AugmentConfig& cfg, Rng& rng) {
    if (batch.rank() != 4) throw ShapeError("augment: batch must be [N,C,H,W]");
    const int n = batch.dim(0), c = batch.dim(1), h = batch.dim(2), w = batch.dim(3);
    Tensor out(batch.shape);
    const float cy = static_cast<float>(h - 1) / 2.0f;
    const float cx = static_cast<float>(w - 1) / 2.0f;

    for (int i = 0; i < n; ++i) {
        // Fixed draw order per image keeps runs reproducible.
        const float shift_y = cfg.shift_fraction == 0.0
                                  ? 0.0f
                                  : rng.uniform(-static_cast<float>(cfg.shift_fraction) * h,
                                                static_cast<float>(cfg.shift_fraction) * h);
        const float shift_x = cfg.shift_fraction == 0.0
                                  ? 0.0f
                                  : rng.uniform(-static_cast<float>(cfg.shift_fraction) * w,
                                                static_cast<float>(cfg.shift_fraction) * w);
        const float zoom = cfg.zoom_range == 0.0
                               ? 1.0f
                               : rng.uniform(1.0f - static_cast<float>(cfg.zoom_range),
                                             1.0f + static_cast<float>(cfg.zoom_range));
        const bool hf = cfg.h_flip && rng.coin_flip();
        const bool vf = cfg.v_flip && rng.coin_flip();
        const float theta = cfg.rotation_degrees == 0.0
                                ? 0.0f
                                : rng.uniform(-static_cast<float>(cfg.rotation_degrees),
                                              static_cast<float>(cfg.rotation_degrees)) *
                                      3.14159265358979323846f / 180.0f;
        const float cos_t = std::cos(theta), sin_t = std::sin(theta);
        const float sy = (vf ? -1.0f : 1.0f) / zoom;
        const float sx = (hf ? -1.0f : 1.0f) / zoom;

        for (int ch = 0; ch < c; ++ch) {
            const float* src = batch.ptr() + (static_cast<std::size_t>(i) * c + ch) *
                                                 static_cast<std::size_t>(h) * w;
            float* dst = out.ptr() + (static_cast<std::size_t>(i) * c + ch) *
                                         static_cast<std::size_t>(h) * w;
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    // Inverse map: output pixel -> source location.
                    const float ry = (static_cast<float>(y) - cy - shift_y);
                    const float rx = (static_cast<float>(x) - cx - shift_x);
                    const float syy = (cos_t * ry + sin_t * rx) * sy + cy;
                    const float sxx = (-sin_t * ry + cos_t * rx) * sx + cx;
                    dst[y * w + x] = sample_bilinear(src, h, w, syy, sxx);
                }
            }
        }
    }
    return out;
}

Tensor flip_horizontal(const Tensor& batch) {
    const int n = batch.dim(0), c = batch.dim(1), h = batch.dim(2), w = batch.dim(3);
    Tensor out(batch.shape);
    for (int i = 0; i < n; ++i)
        for (int ch = 0; ch < c; ++ch)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) out.at(i, ch, y, x) = batch.at(i, ch, y, w - 1 - x);
    return out;
}

Tensor flip_vertical(const Tensor& batch) {
    const int n = batch.dim(0), c = batch.dim(1), h = batch.dim(2), w = batch.dim(3);
    Tensor out(batch.shape);
    for (int i = 0; i < n; ++i)
        for (int ch = 0; ch < c; ++ch)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) out.at(i, ch, y, x) = batch.at(i, ch, h - 1 - y, x);
    return out;
}

void sgd_momentum_step(Tensor& param, const Tensor& grad, Tensor& velocity, double lr,
                       double momentum) {
    if (!param.same_shape(grad) || !param.same_shape(velocity))
        throw ShapeError("sgd_momentum_step: shape mismatch");
    const float m = static_cast<float>(momentum);
    const float step = static_cast<float>(lr);
    for (std::size_t i = 0; i < param.numel(); ++i) {
        velocity.data[i] = m * velocity.data[i] + grad.data[i];
        param.data[i] -= step * velocity.data[i];
    }
}

double lr_at_epoch(const TrainConfig& cfg, int epoch) {
    if (epoch < 0 || epoch >= cfg.epochs) throw ConfigError("lr_at_epoch: epoch out of range");
    int drops = 0;
    for (const int e : cfg.lr_drop_epochs) {
        if (e <= epoch) ++drops;
    }
    return cfg.base_lr * std::pow(cfg.lr_drop_factor, drops);
}

namespace {

std::string fmt_float(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
    return std::string(buf, res.ptr);
}

struct Velocities {
    std::vector<Tensor> weights, bias, gamma, beta;

    explicit Velocities(const Network& net) {
        const std::size_t n = net.plan.layers.size();
        weights.resize(n);
        bias.resize(n);
        gamma.resize(n);
        beta.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const LayerParams& p = net.params[i];
            if (p.weights.numel()) weights[i] = Tensor(p.weights.shape);
            if (p.bias.numel()) bias[i] = Tensor(p.bias.shape);
            if (p.bn_gamma.numel()) gamma[i] = Tensor(p.bn_gamma.shape);
            if (p.bn_beta.numel()) beta[i] = Tensor(p.bn_beta.shape);
        }
    }
};

[[noreturn]] void report_divergence(const Network& net, const Tensor& batch) {
    const std::vector<Tensor> outs = net.forward_all(batch, BnMode::Train);
    for (std::size_t i = 0; i < outs.size(); ++i) {
        if (!outs[i].all_finite()) {
            throw TrainingError("training diverged: first non-finite activation at layer \"" +
                                net.plan.layers[i].name + "\"");
        }
    }
    throw TrainingError("training diverged: non-finite loss");
}

}  // namespace

History train(Network& net, const Dataset& train_data, const TrainConfig& cfg,
              const Dataset* eval_data) {
    cfg.validate();
    if (train_data.size() < 1) throw DataError("train: empty dataset");

    Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
    Rng augment_rng(derive_seed(cfg.seed, "augment"));
    Velocities vel(net);
    History hist;

    std::vector<int> order(static_cast<std::size_t>(train_data.size()));
    for (int i = 0; i < train_data.size(); ++i) order[static_cast<std::size_t>(i)] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = lr_at_epoch(cfg, epoch);
        shuffle_rng.shuffle(order);

        double loss_sum = 0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const std::vector<int> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                       order.begin() + static_cast<std::ptrdiff_t>(end));
            Tensor batch = gather_images(train_data, idx);
            const std::vector<int> labels = gather_labels(train_data, idx);
            if (cfg.augment.enabled()) batch = augment_batch(batch, cfg.augment, augment_rng);

            ForwardCache cache;
            const Tensor logits = net.forward(batch, BnMode::Train, &cache);
            const SoftmaxResultT<float> sm = softmax_crossentropy(logits, labels);
            if (!std::isfinite(sm.loss)) report_divergence(net, batch);
            loss_sum += sm.loss;
            ++batches;

            const Tensor d_logits = softmax_crossentropy_backward(sm.probs, labels);
            const std::vector<LayerGrads> grads = net.backward(cache, d_logits);
            net.apply_bn_updates(cache);

            for (std::size_t i = 0; i < grads.size(); ++i) {
                if (!grads[i].present) continue;
                LayerParams& p = net.params[i];
                if (p.weights.numel())
                    sgd_momentum_step(p.weights, grads[i].d_weights, vel.weights[i], lr, cfg.momentum);
                if (p.bias.numel())
                    sgd_momentum_step(p.bias, grads[i].d_bias, vel.bias[i], lr, cfg.momentum);
                if (p.bn_gamma.numel())
                    sgd_momentum_step(p.bn_gamma, grads[i].d_gamma, vel.gamma[i], lr, cfg.momentum);
                if (p.bn_beta.numel())
                    sgd_momentum_step(p.bn_beta, grads[i].d_beta, vel.beta[i], lr, cfg.momentum);
            }
        }

        EpochStats es;
        es.epoch = epoch;
        es.lr = lr;
        es.train_loss = loss_sum / std::max(1, batches);
        es.test_acc = eval_data ? evaluate(net, *eval_data)
                                : std::numeric_limits<double>::quiet_NaN();
        hist.epochs.push_back(es);
    }
    return hist;
}

void History::save_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write history to " + path);
    os << "epoch,lr,train_loss,test_acc\n";
    for (const EpochStats& e : epochs) {
        os << e.epoch << ',' << fmt_float(e.lr) << ',' << fmt_float(e.train_loss) << ','
           << fmt_float(e.test_acc) << '\n';
    }
}

double evaluate(const Network& net, const Dataset& data, int batch_size) {
    if (data.size() < 1) throw DataError("evaluate: empty dataset");
    int correct = 0;
    for (int start = 0; start < data.size(); start += batch_size) {
        const int count = std::min(batch_size, data.size() - start);
        std::vector<int> idx(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) idx[static_cast<std::size_t>(i)] = start + i;
        const Tensor batch = gather_images(data, idx);
        const Tensor logits = net.forward(batch, BnMode::Infer);
        const int classes = logits.dim(1);
        for (int i = 0; i < count; ++i) {
            int best = 0;
            for (int c = 1; c < classes; ++c) {
                if (logits.at(i, c) > logits.at(i, best)) best = c;
            }
            if (best == data.labels[static_cast<std::size_t>(start + i)]) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

Tensor infer_probs(const Network& net, const Dataset& data, int batch_size) {
    const int classes = net.num_classes();
    Tensor probs({data.size(), classes});
    for (int start = 0; start < data.size(); start += batch_size) {
        const int count = std::min(batch_size, data.size() - start);
        std::vector<int> idx(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) idx[static_cast<std::size_t>(i)] = start + i;
        const Tensor batch = gather_images(data, idx);
        const Tensor p = softmax(net.forward(batch, BnMode::Infer));
        std::copy(p.data.begin(), p.data.end(),
                  probs.ptr() + static_cast<std::size_t>(start) * classes);
    }
    return probs;
}

}  // namespace fznet
