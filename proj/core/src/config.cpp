#include "factorizenet/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fznet {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        bool found = false;
        for (const char* k : known) {
            if (key == k) found = true;
        }
        if (!found) throw ConfigError("unknown key \"" + key + "\" in " + where);
    }
}

void parse_arch(const json& j, MacroArchConfig& cfg) {
    reject_unknown(j, {"input_shape", "stem_channels", "stage_widths", "blocks_per_stage",
                       "dense_widths"},
                   "arch");
    if (j.contains("input_shape")) cfg.input_shape = j["input_shape"].get<std::vector<int>>();
    if (j.contains("stem_channels")) cfg.stem_channels = j["stem_channels"].get<int>();
    if (j.contains("stage_widths")) cfg.stage_widths = j["stage_widths"].get<std::vector<int>>();
    if (j.contains("blocks_per_stage")) cfg.blocks_per_stage = j["blocks_per_stage"].get<int>();
    if (j.contains("dense_widths")) cfg.dense_widths = j["dense_widths"].get<std::vector<int>>();
}

void parse_augment(const json& j, AugmentConfig& cfg) {
    reject_unknown(j, {"shift_fraction", "zoom_range", "h_flip", "v_flip", "rotation_degrees"},
                   "train.augment");
    if (j.contains("shift_fraction")) cfg.shift_fraction = j["shift_fraction"].get<double>();
    if (j.contains("zoom_range")) cfg.zoom_range = j["zoom_range"].get<double>();
    if (j.contains("h_flip")) cfg.h_flip = j["h_flip"].get<bool>();
    if (j.contains("v_flip")) cfg.v_flip = j["v_flip"].get<bool>();
    if (j.contains("rotation_degrees")) cfg.rotation_degrees = j["rotation_degrees"].get<double>();
}

void parse_train(const json& j, TrainConfig& cfg) {
    reject_unknown(j, {"epochs", "batch_size", "base_lr", "momentum", "lr_drop_epochs",
                       "lr_drop_factor", "augment", "seed"},
                   "train");
    if (j.contains("epochs")) cfg.epochs = j["epochs"].get<int>();
    if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<int>();
    if (j.contains("base_lr")) cfg.base_lr = j["base_lr"].get<double>();
    if (j.contains("momentum")) cfg.momentum = j["momentum"].get<double>();
    if (j.contains("lr_drop_epochs")) cfg.lr_drop_epochs = j["lr_drop_epochs"].get<std::vector<int>>();
    if (j.contains("lr_drop_factor")) cfg.lr_drop_factor = j["lr_drop_factor"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("augment")) parse_augment(j["augment"], cfg.augment);
}

}  // namespace

ToolConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    ToolConfig cfg;
    reject_unknown(j, {"arch", "train"}, "config");
    if (j.contains("arch")) parse_arch(j["arch"], cfg.arch);
    if (j.contains("train")) parse_train(j["train"], cfg.train);
    cfg.arch.validate();
    cfg.train.validate();
    return cfg;
}

ToolConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config_json(ss.str());
}

}  // namespace fznet
