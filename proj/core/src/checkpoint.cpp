#include "factorizenet/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace fznet {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json desc_to_json(const LayerDesc& d) {
    return json{{"kind", layer_kind_name(d.kind)},
                {"role", layer_role_name(d.role)},
                {"name", d.name},
                {"in_channels", d.in_channels},
                {"out_channels", d.out_channels},
                {"kernel", d.kernel},
                {"groups", d.groups},
                {"stride", d.stride},
                {"padding", d.padding},
                {"out_h", d.out_h},
                {"out_w", d.out_w},
                {"fan_in", d.fan_in},
                {"fan_out", d.fan_out},
                {"pool_window", d.pool_window},
                {"pool_stride", d.pool_stride},
                {"epsilon", d.epsilon},
                {"has_pointwise_follower", d.has_pointwise_follower}};
}

LayerKind kind_from_name(const std::string& s) {
    for (const LayerKind k : {LayerKind::Conv2D, LayerKind::BatchNorm, LayerKind::ReLU,
                              LayerKind::MaxPool2D, LayerKind::Dense, LayerKind::SoftmaxOutput}) {
        if (s == layer_kind_name(k)) return k;
    }
    throw CheckpointError("unknown layer kind in manifest: " + s);
}

LayerDesc desc_from_json(const json& j) {
    LayerDesc d;
    d.kind = kind_from_name(j.at("kind").get<std::string>());
    d.role = layer_role_from_name(j.at("role").get<std::string>());
    d.name = j.at("name").get<std::string>();
    d.in_channels = j.at("in_channels").get<int>();
    d.out_channels = j.at("out_channels").get<int>();
    d.kernel = j.at("kernel").get<int>();
    d.groups = j.at("groups").get<int>();
    d.stride = j.at("stride").get<int>();
    d.padding = j.at("padding").get<int>();
    d.out_h = j.at("out_h").get<int>();
    d.out_w = j.at("out_w").get<int>();
    d.fan_in = j.at("fan_in").get<int>();
    d.fan_out = j.at("fan_out").get<int>();
    d.pool_window = j.at("pool_window").get<int>();
    d.pool_stride = j.at("pool_stride").get<int>();
    d.epsilon = j.at("epsilon").get<double>();
    d.has_pointwise_follower = j.at("has_pointwise_follower").get<bool>();
    return d;
}

struct TensorSlot {
    const char* param;
    Tensor* tensor;
};

std::vector<TensorSlot> tensor_slots(LayerParams& p) {
    std::vector<TensorSlot> slots;
    if (p.weights.numel()) slots.push_back({"weights", &p.weights});
    if (p.bias.numel()) slots.push_back({"bias", &p.bias});
    if (p.bn_gamma.numel()) slots.push_back({"bn_gamma", &p.bn_gamma});
    if (p.bn_beta.numel()) slots.push_back({"bn_beta", &p.bn_beta});
    if (p.bn_running_mean.numel()) slots.push_back({"bn_running_mean", &p.bn_running_mean});
    if (p.bn_running_var.numel()) slots.push_back({"bn_running_var", &p.bn_running_var});
    return slots;
}

void append_le_f32(std::vector<std::uint8_t>& blob, const Tensor& t) {
    for (const float v : t.data) {
        const std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
        blob.push_back(static_cast<std::uint8_t>(bits & 0xff));
        blob.push_back(static_cast<std::uint8_t>((bits >> 8) & 0xff));
        blob.push_back(static_cast<std::uint8_t>((bits >> 16) & 0xff));
        blob.push_back(static_cast<std::uint8_t>((bits >> 24) & 0xff));
    }
}

void read_le_f32(const std::vector<std::uint8_t>& blob, std::size_t offset, Tensor& t) {
    const std::uint8_t* p = blob.data() + offset;
    for (float& v : t.data) {
        const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                                   (static_cast<std::uint32_t>(p[1]) << 8) |
                                   (static_cast<std::uint32_t>(p[2]) << 16) |
                                   (static_cast<std::uint32_t>(p[3]) << 24);
        v = std::bit_cast<float>(bits);
        p += 4;
    }
}

}  // namespace

void save_checkpoint(const Network& net, const std::string& dir) {
    fs::create_directories(dir);

    json manifest;
    manifest["format"] = "factorizenet-checkpoint";
    manifest["version"] = 1;
    manifest["scheme_label"] = net.plan.scheme_label;
    json layers = json::array();
    for (const LayerDesc& d : net.plan.layers) layers.push_back(desc_to_json(d));
    manifest["layers"] = layers;

    std::vector<std::uint8_t> blob;
    json tensors = json::array();
    std::vector<LayerParams> params = net.params;  // slots need non-const access
    for (std::size_t i = 0; i < params.size(); ++i) {
        for (const TensorSlot& slot : tensor_slots(params[i])) {
            json t;
            t["layer"] = i;
            t["param"] = slot.param;
            t["shape"] = slot.tensor->shape;
            t["dtype"] = "f32";
            t["offset"] = blob.size();
            t["bytes"] = slot.tensor->numel() * 4;
            tensors.push_back(t);
            append_le_f32(blob, *slot.tensor);
        }
    }
    manifest["tensors"] = tensors;
    manifest["blob_bytes"] = blob.size();

    {
        std::ofstream os(fs::path(dir) / "manifest.json");
        if (!os) throw CheckpointError("cannot write manifest under " + dir);
        os << manifest.dump(2) << '\n';
    }
    {
        std::ofstream os(fs::path(dir) / "weights.bin", std::ios::binary);
        if (!os) throw CheckpointError("cannot write weight blob under " + dir);
        os.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
    }
}

Network load_checkpoint(const std::string& dir) {
    json manifest;
    {
        std::ifstream is(fs::path(dir) / "manifest.json");
        if (!is) throw CheckpointError("missing manifest.json under " + dir);
        try {
            is >> manifest;
        } catch (const json::exception& e) {
            throw CheckpointError("unparseable manifest under " + dir + ": " + e.what());
        }
    }
    if (manifest.value("format", "") != "factorizenet-checkpoint") {
        throw CheckpointError("not a checkpoint manifest: " + dir);
    }

    Network net;
    net.plan.scheme_label = manifest.at("scheme_label").get<std::string>();
    for (const json& j : manifest.at("layers")) net.plan.layers.push_back(desc_from_json(j));
    net.params = make_params(net.plan);

    std::vector<std::uint8_t> blob;
    {
        std::ifstream is(fs::path(dir) / "weights.bin", std::ios::binary);
        if (!is) throw CheckpointError("missing weights.bin under " + dir);
        is.seekg(0, std::ios::end);
        blob.resize(static_cast<std::size_t>(is.tellg()));
        is.seekg(0);
        is.read(reinterpret_cast<char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
    }
    const std::size_t expected = manifest.at("blob_bytes").get<std::size_t>();
    if (blob.size() != expected) {
        throw CheckpointError("corrupt checkpoint: blob is " + std::to_string(blob.size()) +
                              " bytes, manifest expects " + std::to_string(expected));
    }

    for (const json& t : manifest.at("tensors")) {
        const std::size_t layer = t.at("layer").get<std::size_t>();
        const std::string param = t.at("param").get<std::string>();
        const std::size_t offset = t.at("offset").get<std::size_t>();
        const std::size_t bytes = t.at("bytes").get<std::size_t>();
        if (layer >= net.params.size()) throw CheckpointError("corrupt checkpoint: bad layer index");
        Tensor* dst = nullptr;
        for (const TensorSlot& slot : tensor_slots(net.params[layer])) {
            if (param == slot.param) dst = slot.tensor;
        }
        if (!dst) throw CheckpointError("corrupt checkpoint: unexpected tensor " + param);
        if (t.at("shape").get<std::vector<int>>() != dst->shape || bytes != dst->numel() * 4 ||
            offset + bytes > blob.size()) {
            throw CheckpointError("corrupt checkpoint: tensor " + param + " of layer " +
                                  std::to_string(layer) + " does not match the plan");
        }
        read_le_f32(blob, offset, *dst);
    }
    return net;
}

}  // namespace fznet
