#pragma once

#include <array>
#include <string>
#include <vector>

#include "pcr/encoder.hpp"
#include "pcr/registration.hpp"

namespace pcr {

enum class ModelVariant { kSingleShot, kIterative };

std::string variant_name(ModelVariant v);
ModelVariant parse_variant(const std::string& name);  // throws on unknown name

// Fully connected regression head over the concatenated global features.
// The single-shot head uses hidden sizes (1024, 1024, 512, 512, 256); the
// iterative head uses (1024, 512, 256) with dropout before the output layer.
struct HeadConfig {
  std::vector<std::size_t> hidden;
  double dropout = 0.0;
};

struct ModelConfig {
  ModelVariant variant = ModelVariant::kIterative;
  EncoderConfig encoder;
  HeadConfig head;

  // Encoder specs followed by head specs ("head.0".. plus "head.out"). The
  // output layer's weights are shrunk so untrained poses start small.
  std::vector<nn::LayerSpec> layer_specs() const;
};

// Paper-size configs; width_divisor scales every width down (minimum 1) for
// desk-scale runs.
ModelConfig make_single_shot_config(std::size_t width_divisor = 1);
ModelConfig make_iterative_config(double dropout = 0.5, std::size_t width_divisor = 1);

struct HeadCache {
  std::vector<nn::Tensor2> inputs;
  std::vector<nn::Tensor2> pre_act;
  std::vector<std::uint8_t> dropout_mask;
  bool dropout_active = false;
};

// Concatenates [feat_s, feat_t], runs the FC stack, returns the raw 7-vector
// pose. rng is only consulted when training with dropout enabled.
Pose7 head_forward(const nn::ParamStore& params, const HeadConfig& config,
                   const GlobalFeature& feat_s, const GlobalFeature& feat_t,
                   bool training, Rng* rng, HeadCache* cache = nullptr);

// Accumulates head parameter gradients; returns (dfeat_s, dfeat_t).
std::pair<std::vector<nn::scalar>, std::vector<nn::scalar>> head_backward(
    nn::ParamStore& params, const HeadConfig& config, const HeadCache& cache,
    const std::array<double, 7>& dpose);

// Differentiable pose application used by the unrolled training graph.
struct PoseCache {
  Eigen::Vector4d q = Eigen::Vector4d::Zero();  // normalized (w, x, y, z)
  double raw_norm = 0.0;
  bool degenerate = false;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

nn::Tensor2 pose_apply_forward(const Pose7& pose, const nn::Tensor2& points,
                               PoseCache* cache = nullptr);

// d_out is d(loss)/d(transformed points); returns d(loss)/d(input points)
// and writes d(loss)/d(pose7) as (t x, t y, t z, qw, qx, qy, qz).
nn::Tensor2 pose_apply_backward(const PoseCache& cache, const nn::Tensor2& points_in,
                                const nn::Tensor2& d_out, std::array<double, 7>& dpose);

// Single forward pass in inference mode; per_iteration has length 1.
RegistrationResult register_single_shot(const nn::ParamStore& params,
                                        const ModelConfig& config,
                                        const PointCloud& source, const PointCloud& tmpl);

// Predict-transform-repeat loop with the shared convergence criterion; the
// overall transform is T(n) * ... * T(1).
RegistrationResult register_iterative(const nn::ParamStore& params, const ModelConfig& config,
                                      const PointCloud& source, const PointCloud& tmpl,
                                      int max_iter = 20, double eps = 1e-7);

struct TrainIterationCache {
  EncodeCache encode_source;
  HeadCache head;
  PoseCache pose;
  Pose7 pose7;
};

struct TrainForwardCache {
  EncodeCache encode_template;
  GlobalFeature feat_template;
  std::vector<TrainIterationCache> iterations;
};

// Unrolled n_iter training passes (dropout active); returns the transformed
// source points that feed the loss.
nn::Tensor2 train_forward_iterative(const nn::ParamStore& params, const ModelConfig& config,
                                    const nn::Tensor2& source, const nn::Tensor2& tmpl,
                                    int n_iter, Rng& rng, TrainForwardCache& cache);

// Backpropagates through all unrolled iterations (the transform application
// is differentiable in the pose parameters); accumulates parameter grads.
void train_backward_iterative(nn::ParamStore& params, const ModelConfig& config,
                              const TrainForwardCache& cache, const nn::Tensor2& d_est);

}  // namespace pcr
