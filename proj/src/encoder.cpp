#include "pcr/encoder.hpp"

#include <stdexcept>

namespace pcr {

namespace {

std::string layer_name(std::size_t i) { return "enc." + std::to_string(i); }

}  // namespace

std::vector<nn::LayerSpec> EncoderConfig::layer_specs() const {
  std::vector<nn::LayerSpec> specs;
  std::size_t in = 3;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    specs.push_back({layer_name(i), in, widths[i], 1.0});
    in = widths[i];
  }
  return specs;
}

nn::Tensor2 cloud_to_tensor(const PointCloud& cloud) {
  nn::Tensor2 t(cloud.size(), 3);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int k = 0; k < 3; ++k) t.at(i, k) = static_cast<nn::scalar>(cloud.points[i][k]);
  }
  return t;
}

GlobalFeature encode(const nn::ParamStore& params, const EncoderConfig& config,
                     const nn::Tensor2& cloud, EncodeCache* cache) {
  if (cloud.rows == 0) throw std::invalid_argument("encode: empty cloud");
  if (cloud.cols != 3) throw std::invalid_argument("encode: cloud tensor must be N x 3");

  if (cache) {
    cache->inputs.clear();
    cache->pre_act.clear();
    cache->n_points = cloud.rows;
  }
  nn::Tensor2 x = cloud;
  for (std::size_t i = 0; i < config.widths.size(); ++i) {
    const nn::Param& p = params.get(layer_name(i));
    if (p.fan_in() != x.cols || p.fan_out() != config.widths[i]) {
      throw std::invalid_argument("encode: parameter shape does not match config at " +
                                  layer_name(i));
    }
    nn::Tensor2 pre = nn::dense_forward(x, p.w, p.b);
    if (cache) {
      cache->inputs.push_back(std::move(x));
      cache->pre_act.push_back(pre);
    }
    x = nn::relu_forward(pre);
  }

  GlobalFeature feature;
  std::vector<std::uint32_t> argmax;
  nn::maxpool_points(x, feature.values, argmax);
  if (cache) cache->argmax = std::move(argmax);
  return feature;
}

GlobalFeature encode(const nn::ParamStore& params, const EncoderConfig& config,
                     const PointCloud& cloud, EncodeCache* cache) {
  return encode(params, config, cloud_to_tensor(cloud), cache);
}

nn::Tensor2 encode_backward(nn::ParamStore& params, const EncoderConfig& config,
                            const EncodeCache& cache,
                            const std::vector<nn::scalar>& dfeature) {
  const std::size_t n_layers = config.widths.size();
  if (cache.inputs.size() != n_layers || cache.pre_act.size() != n_layers) {
    throw std::invalid_argument("encode_backward: cache does not match config");
  }
  if (dfeature.size() != config.feature_size()) {
    throw std::invalid_argument("encode_backward: dfeature size mismatch");
  }

  nn::Tensor2 d_post = nn::maxpool_backward(cache.argmax, dfeature, cache.n_points);
  nn::Tensor2 d_in;
  for (std::size_t i = n_layers; i-- > 0;) {
    nn::Param& p = params.get(layer_name(i));
    const nn::Tensor2 d_pre = nn::relu_backward(cache.pre_act[i], d_post);
    nn::dense_backward(cache.inputs[i], p.w, d_pre, &d_in, p.gw, p.gb);
    d_post = std::move(d_in);
  }
  return d_post;  // N x 3
}

}  // namespace pcr
