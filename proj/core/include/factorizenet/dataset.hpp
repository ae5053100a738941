#pragma once

#include <string>
#include <vector>

#include "factorizenet/tensor.hpp"

namespace fznet {

/// Labeled image set. Images are [N, 3, H, W], RGB, scaled to [0, 1].
struct Dataset {
    Tensor images;
    std::vector<int> labels;
    std::string split;  // "train" or "test"

    int size() const { return images.numel() == 0 ? 0 : images.dim(0); }
    int channels() const { return images.dim(1); }
    int height() const { return images.dim(2); }
    int width() const { return images.dim(3); }
};

struct Cifar10 {
    Dataset train, test;
};

/// Loads the CIFAR-10 binary batches from a directory: data_batch_1..5.bin
/// (whichever exist, at least one) plus test_batch.bin. Each record is one
/// label byte followed by 3072 pixel bytes (row-major R, then G, then B
/// plane); pixels are scaled by 1/255.
Cifar10 load_cifar10(const std::string& dir);

/// Single batch file, any record count.
Dataset load_cifar10_batch(const std::string& path, const std::string& split);

/// Serializes a dataset back to the binary batch format. Inverse of the
/// loader for images on the k/255 grid.
void write_cifar10_batch(const std::string& path, const Dataset& ds);

/// Keeps only the listed classes and remaps labels to 0..k-1 in list order.
Dataset filter_classes(const Dataset& ds, const std::vector<int>& classes);

/// First n records.
Dataset take(const Dataset& ds, int n);

/// Halves the spatial resolution by 2x2 average pooling.
Dataset downscale2x(const Dataset& ds);

/// Images at the given indices, as one batch tensor.
Tensor gather_images(const Dataset& ds, const std::vector<int>& indices);

std::vector<int> gather_labels(const Dataset& ds, const std::vector<int>& indices);

/// Synthetic learnable stand-in for environments without the real data:
/// 32x32 RGB images of noisy sinusoidal gratings whose orientation encodes
/// the class. Pixel values sit on the k/255 grid, so writing with
/// write_cifar10_batch and reloading is byte-exact.
Dataset make_synthetic_dataset(int n, int num_classes, std::uint64_t seed,
                               const std::string& split);

}  // namespace fznet
