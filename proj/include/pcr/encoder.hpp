#pragma once

#include <vector>

#include "pcr/nncore.hpp"
#include "pcr/point_cloud.hpp"

namespace pcr {

// PointNet-style global feature function: shared per-point MLPs followed by
// a column-wise max-pool. Widths are configurable so tests can run
// scaled-down encoders; (64, 64, 64, 128, 1024) is the shipped default.
struct EncoderConfig {
  std::vector<std::size_t> widths = {64, 64, 64, 128, 1024};

  std::size_t feature_size() const { return widths.back(); }

  // Layer specs named "enc.0".."enc.k-1", input width 3.
  std::vector<nn::LayerSpec> layer_specs() const;
};

struct GlobalFeature {
  std::vector<nn::scalar> values;
};

struct EncodeCache {
  std::vector<nn::Tensor2> inputs;    // input to each shared layer
  std::vector<nn::Tensor2> pre_act;   // pre-activation per layer
  std::vector<std::uint32_t> argmax;  // max-pool routing
  std::size_t n_points = 0;
};

nn::Tensor2 cloud_to_tensor(const PointCloud& cloud);

// Applies the shared MLP stack (ReLU after every layer) point-wise, then
// max-pools over points. Pass a cache to enable encode_backward. Throws on
// an empty cloud or missing/mismatched encoder parameters.
GlobalFeature encode(const nn::ParamStore& params, const EncoderConfig& config,
                     const nn::Tensor2& cloud, EncodeCache* cache = nullptr);
GlobalFeature encode(const nn::ParamStore& params, const EncoderConfig& config,
                     const PointCloud& cloud, EncodeCache* cache = nullptr);

// Exact reverse through the max-pool routing and shared layers. Accumulates
// parameter gradients into params and returns d(loss)/d(cloud), shape N x 3.
nn::Tensor2 encode_backward(nn::ParamStore& params, const EncoderConfig& config,
                            const EncodeCache& cache,
                            const std::vector<nn::scalar>& dfeature);

}  // namespace pcr
