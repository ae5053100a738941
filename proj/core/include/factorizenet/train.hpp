#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "factorizenet/dataset.hpp"
#include "factorizenet/network.hpp"
#include "factorizenet/rng.hpp"

namespace fznet {

struct AugmentConfig {
    double shift_fraction = 0.1;     // max shift as a fraction of H/W
    double zoom_range = 0.1;         // zoom factor drawn from [1-z, 1+z]
    bool h_flip = true;
    bool v_flip = true;
    double rotation_degrees = 15.0;  // rotation drawn from +-deg

    bool enabled() const {
        return shift_fraction != 0.0 || zoom_range != 0.0 || h_flip || v_flip ||
               rotation_degrees != 0.0;
    }
};

struct TrainConfig {
    int epochs = 200;
    int batch_size = 128;
    double base_lr = 0.01;
    double momentum = 0.9;
    std::vector<int> lr_drop_epochs{75, 120, 170};
    double lr_drop_factor = 0.1;
    AugmentConfig augment;
    std::uint64_t seed = 42;

    void validate() const;
};

/// Applies one random affine warp per image (shift, zoom, optional flips,
/// rotation composed into a single transform; bilinear sampling with
/// edge-replicate fill). Labels are untouched by the caller.
Tensor augment_batch(const Tensor& batch, const AugmentConfig& cfg, Rng& rng);

/// Deterministic flips, exposed for the augmentation involution checks.
Tensor flip_horizontal(const Tensor& batch);
Tensor flip_vertical(const Tensor& batch);

/// Classical momentum: v <- momentum*v + g; p <- p - lr*v.
void sgd_momentum_step(Tensor& param, const Tensor& grad, Tensor& velocity, double lr,
                       double momentum);

/// base_lr * drop_factor^(number of drop epochs <= epoch); drops take effect
/// at the start of the named (0-indexed) epoch.
double lr_at_epoch(const TrainConfig& cfg, int epoch);

struct EpochStats {
    int epoch = 0;
    double lr = 0;
    double train_loss = 0;
    double test_acc = 0;  // NaN when no eval set was given
};

struct History {
    std::vector<EpochStats> epochs;
    void save_csv(const std::string& path) const;
};

/// SGD-with-momentum training loop: shuffled mini-batches, augmentation,
/// forward/backward, LR schedule and BatchNorm running-stat updates. A
/// non-finite loss aborts with the first offending layer named.
History train(Network& net, const Dataset& train_data, const TrainConfig& cfg,
              const Dataset* eval_data = nullptr);

/// Top-1 accuracy, infer mode. Invariant to how the set is batched.
double evaluate(const Network& net, const Dataset& data, int batch_size = 256);

/// Softmax outputs for a whole dataset, in record order.
Tensor infer_probs(const Network& net, const Dataset& data, int batch_size = 256);

}  // namespace fznet
