#pragma once

#include <string>

#include <json.hpp>

#include "pcr/nncore.hpp"

namespace pcr::nn {

// Checkpoint file: magic "PCRN", u32 manifest length, manifest (JSON text:
// layer names and shapes, Adam state, caller extras), then every parameter
// array concatenated in manifest order as little-endian floats (weights,
// biases, then the four Adam moment arrays per layer). Round-trips
// bit-exactly.
struct Checkpoint {
  ParamStore params;
  AdamState adam;
  nlohmann::json manifest;
};

void save_checkpoint(const std::string& path, const ParamStore& params,
                     const AdamState& adam, const nlohmann::json& extra);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace pcr::nn
