#pragma once

#include <string>

#include "factorizenet/network.hpp"

namespace fznet {

/// Writes `dir`/manifest.json (plan, tensor names, shapes, dtype, byte
/// offsets) and `dir`/weights.bin (one little-endian raw fp32 blob).
/// load_checkpoint reproduces the parameters bit-exactly.
void save_checkpoint(const Network& net, const std::string& dir);

Network load_checkpoint(const std::string& dir);

}  // namespace fznet
