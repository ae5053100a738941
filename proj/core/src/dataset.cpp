#include "factorizenet/dataset.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include "factorizenet/rng.hpp"

namespace fznet {

namespace {

constexpr int kImageDim = 32;
constexpr std::size_t kPixelsPerImage = 3 * kImageDim * kImageDim;
constexpr std::size_t kRecordBytes = 1 + kPixelsPerImage;

}  // namespace

Dataset load_cifar10_batch(const std::string& path, const std::string& split) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("missing dataset file: " + path);
    is.seekg(0, std::ios::end);
    const std::size_t bytes = static_cast<std::size_t>(is.tellg());
    is.seekg(0);
    if (bytes == 0 || bytes % kRecordBytes != 0) {
        throw DataError("truncated dataset file " + path + ": " + std::to_string(bytes) +
                        " bytes, record boundary broken at offset " +
                        std::to_string(bytes - bytes % kRecordBytes));
    }
    const int n = static_cast<int>(bytes / kRecordBytes);

    Dataset ds;
    ds.split = split;
    ds.images = Tensor({n, 3, kImageDim, kImageDim});
    ds.labels.resize(static_cast<std::size_t>(n));

    std::vector<std::uint8_t> record(kRecordBytes);
    for (int i = 0; i < n; ++i) {
        if (!is.read(reinterpret_cast<char*>(record.data()), static_cast<std::streamsize>(kRecordBytes))) {
            throw DataError("read failed in " + path + " at offset " +
                            std::to_string(static_cast<std::size_t>(i) * kRecordBytes));
        }
        if (record[0] > 9) {
            throw DataError("corrupt record in " + path + " at offset " +
                            std::to_string(static_cast<std::size_t>(i) * kRecordBytes) +
                            ": label byte " + std::to_string(record[0]) + " > 9");
        }
        ds.labels[static_cast<std::size_t>(i)] = record[0];
        float* dst = ds.images.ptr() + static_cast<std::size_t>(i) * kPixelsPerImage;
        for (std::size_t p = 0; p < kPixelsPerImage; ++p) {
            dst[p] = static_cast<float>(record[1 + p]) * (1.0f / 255.0f);
        }
    }
    return ds;
}

Cifar10 load_cifar10(const std::string& dir) {
    namespace fs = std::filesystem;
    Cifar10 data;
    data.train.split = "train";
    data.train.labels.clear();

    std::vector<Dataset> parts;
    for (int i = 1; i <= 5; ++i) {
        const fs::path p = fs::path(dir) / ("data_batch_" + std::to_string(i) + ".bin");
        if (fs::exists(p)) parts.push_back(load_cifar10_batch(p.string(), "train"));
    }
    if (parts.empty()) {
        throw DataError("no data_batch_*.bin found under " + dir);
    }
    int total = 0;
    for (const Dataset& d : parts) total += d.size();
    data.train.images = Tensor({total, 3, kImageDim, kImageDim});
    float* dst = data.train.images.ptr();
    for (const Dataset& d : parts) {
        std::copy(d.images.data.begin(), d.images.data.end(), dst);
        dst += d.images.numel();
        data.train.labels.insert(data.train.labels.end(), d.labels.begin(), d.labels.end());
    }

    const fs::path tp = fs::path(dir) / "test_batch.bin";
    data.test = load_cifar10_batch(tp.string(), "test");
    return data;
}

void write_cifar10_batch(const std::string& path, const Dataset& ds) {
    if (ds.size() > 0 && (ds.height() != kImageDim || ds.width() != kImageDim || ds.channels() != 3))
        throw DataError("write_cifar10_batch: images must be [N,3,32,32]");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write dataset file: " + path);
    for (int i = 0; i < ds.size(); ++i) {
        std::uint8_t label = static_cast<std::uint8_t>(ds.labels[static_cast<std::size_t>(i)]);
        os.write(reinterpret_cast<const char*>(&label), 1);
        const float* src = ds.images.ptr() + static_cast<std::size_t>(i) * kPixelsPerImage;
        std::array<std::uint8_t, kPixelsPerImage> px;
        for (std::size_t p = 0; p < kPixelsPerImage; ++p) {
            const float v = src[p] * 255.0f;
            px[p] = static_cast<std::uint8_t>(v + 0.5f);
        }
        os.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    }
}

Dataset filter_classes(const Dataset& ds, const std::vector<int>& classes) {
    std::vector<int> keep;
    for (int i = 0; i < ds.size(); ++i) {
        for (std::size_t c = 0; c < classes.size(); ++c) {
            if (ds.labels[static_cast<std::size_t>(i)] == classes[c]) {
                keep.push_back(i);
                break;
            }
        }
    }
    if (keep.empty()) throw DataError("filter_classes: no records with the requested classes");
    Dataset out;
    out.split = ds.split;
    out.images = gather_images(ds, keep);
    out.labels.reserve(keep.size());
    for (const int i : keep) {
        const int lbl = ds.labels[static_cast<std::size_t>(i)];
        for (std::size_t c = 0; c < classes.size(); ++c) {
            if (lbl == classes[c]) {
                out.labels.push_back(static_cast<int>(c));
                break;
            }
        }
    }
    return out;
}

Dataset take(const Dataset& ds, int n) {
    if (n < 1 || n > ds.size()) throw DataError("take: n out of range");
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    Dataset out;
    out.split = ds.split;
    out.images = gather_images(ds, idx);
    out.labels.assign(ds.labels.begin(), ds.labels.begin() + n);
    return out;
}

Dataset downscale2x(const Dataset& ds) {
    const int n = ds.size(), c = ds.channels(), h = ds.height(), w = ds.width();
    if (h % 2 != 0 || w % 2 != 0) throw DataError("downscale2x: odd spatial dims");
    Dataset out;
    out.split = ds.split;
    out.labels = ds.labels;
    out.images = Tensor({n, c, h / 2, w / 2});
    for (int i = 0; i < n; ++i) {
        for (int ch = 0; ch < c; ++ch) {
            for (int y = 0; y < h / 2; ++y) {
                for (int x = 0; x < w / 2; ++x) {
                    const float s = ds.images.at(i, ch, 2 * y, 2 * x) +
                                    ds.images.at(i, ch, 2 * y, 2 * x + 1) +
                                    ds.images.at(i, ch, 2 * y + 1, 2 * x) +
                                    ds.images.at(i, ch, 2 * y + 1, 2 * x + 1);
                    out.images.at(i, ch, y, x) = s * 0.25f;
                }
            }
        }
    }
    return out;
}

Tensor gather_images(const Dataset& ds, const std::vector<int>& indices) {
    const int c = ds.channels(), h = ds.height(), w = ds.width();
    const std::size_t img = static_cast<std::size_t>(c) * h * w;
    Tensor out({static_cast<int>(indices.size()), c, h, w});
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const float* src = ds.images.ptr() + static_cast<std::size_t>(indices[k]) * img;
        std::copy(src, src + img, out.ptr() + k * img);
    }
    return out;
}

std::vector<int> gather_labels(const Dataset& ds, const std::vector<int>& indices) {
    std::vector<int> out;
    out.reserve(indices.size());
    for (const int i : indices) out.push_back(ds.labels[static_cast<std::size_t>(i)]);
    return out;
}

Dataset make_synthetic_dataset(int n, int num_classes, std::uint64_t seed,
                               const std::string& split) {
    if (n < 1 || num_classes < 2 || num_classes > 10)
        throw DataError("make_synthetic_dataset: need n >= 1 and 2..10 classes");
    Rng rng(derive_seed(seed, "synth-" + split));
    Dataset ds;
    ds.split = split;
    ds.images = Tensor({n, 3, kImageDim, kImageDim});
    ds.labels.resize(static_cast<std::size_t>(n));

    const float channel_gain[3] = {0.9f, 1.0f, 1.1f};
    for (int i = 0; i < n; ++i) {
        const int label = static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(num_classes)));
        ds.labels[static_cast<std::size_t>(i)] = label;
        const float theta = 3.14159265f * static_cast<float>(label) / static_cast<float>(num_classes);
        const float freq = rng.uniform(2.0f, 6.0f);
        const float phase = rng.uniform(0.0f, 6.2831853f);
        const float dir_y = std::cos(theta), dir_x = std::sin(theta);
        for (int y = 0; y < kImageDim; ++y) {
            for (int x = 0; x < kImageDim; ++x) {
                const float t = (dir_y * y + dir_x * x) / static_cast<float>(kImageDim);
                const float base = 0.5f + 0.35f * std::sin(6.2831853f * freq * t + phase);
                for (int c = 0; c < 3; ++c) {
                    float v = base * channel_gain[c] + 0.08f * static_cast<float>(rng.normal());
                    v = std::min(1.0f, std::max(0.0f, v));
                    // snap onto the uint8 grid so file round trips are exact
                    const int q = static_cast<int>(v * 255.0f + 0.5f);
                    ds.images.at(i, c, y, x) = static_cast<float>(q) * (1.0f / 255.0f);
                }
            }
        }
    }
    return ds;
}

}  // namespace fznet
